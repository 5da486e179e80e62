#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cdpp/kernel.hpp"
#include "cdpp/parallel.hpp"
#include "cdpp/rng.hpp"
#include "cdpp/types.hpp"

namespace cdpp {

/// Mean over cycles and points of the squared displacement of each point
/// between consecutive cycles. Points keep their index across cycles.
double average_movement(const std::vector<SampleSet>& chain);

/// Sorts every 1-d set so that points are matched across cycles by rank.
std::vector<SampleSet> sort_matched(const std::vector<SampleSet>& chain);

enum class EssTruncation {
  verbatim,  // first delta with rho_{2d} + rho_{2d+1} > 0; sum to lag 2d+1
  geyer,     // first delta with rho_{2d} + rho_{2d+1} <= 0; sum to lag 2d-1
};

/// Autocorrelations of each point's first coordinate (1/T normalization),
/// averaged over points; entry s is lag s, entry 0 is 1.
std::vector<double> mean_autocorrelation(const std::vector<SampleSet>& chain, int max_lag);

/// 1 / (1 + 2 sum rho_s), clamped to (0, 1].
double ess_alpha(const std::vector<SampleSet>& chain, EssTruncation rule = EssTruncation::verbatim);

/// Scalar chain convenience.
double ess_alpha(const std::vector<double>& series, EssTruncation rule = EssTruncation::verbatim);

/// Distance from each reference point to its nearest candidate.
std::vector<double> nearest_distances(const SampleSet& reference, const SampleSet& candidates,
                                      Exec exec = Exec::serial);

/// Fraction of reference points with a candidate within eps.
double coverage_rate(const SampleSet& reference, const SampleSet& candidates, double eps);

/// Smallest eps at which the coverage reaches `fraction`.
double epsilon_for_coverage(std::vector<double> nearest, double fraction);

struct CoverageRun {
  std::vector<double> nearest_dpp, nearest_iid;
};

/// Fits a Gaussian to the DPP sample's mean and covariance (loaded with 1e-8
/// on the diagonal), draws as many i.i.d. points and measures both against
/// the reference.
CoverageRun coverage_experiment(const SampleSet& reference, const SampleSet& dpp_sample, RngStream& rng,
                                Exec exec = Exec::serial);

struct CoverageCurves {
  std::vector<double> epsilon, dpp, iid;
};

/// Mean coverage curves over runs on a uniform grid from 0 to the largest
/// nearest distance seen.
CoverageCurves coverage_curves(const std::vector<CoverageRun>& runs, int grid_points);

/// 98% N(0, I) and 2% N(5 e_1, 0.01 I) in d dimensions; labels mark the rare mode.
SampleSet rare_mode_data(int n, int d, RngStream& rng, std::vector<int>* rare = nullptr);

/// Gaussian quality at the reference mean with half the reference covariance;
/// Gaussian similarity with the reference covariance.
KernelSpec coverage_kernel(const SampleSet& reference);

Eigen::VectorXd sample_mean(const SampleSet& xs);
Eigen::MatrixXd sample_covariance(const SampleSet& xs);

}  // namespace cdpp
