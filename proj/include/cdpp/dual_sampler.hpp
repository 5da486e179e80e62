#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cdpp/feature_maps.hpp"
#include "cdpp/rng.hpp"
#include "cdpp/types.hpp"

namespace cdpp {

/// Elementary symmetric polynomials e_k^n of the first n eigenvalues.
/// Stored for eigenvalues scaled by their maximum, with an extra log scale
/// per column so that no entry exceeds 1e300.
struct ESPTable {
  int K = 0;
  int D = 0;
  double lambda_scale = 1.0;
  std::vector<double> lambda;           // scaled, length D
  std::vector<std::vector<double>> e;   // e[k][n], k <= K, n <= D
  std::vector<double> col_log_scale;    // length D+1

  double value(int k, int n) const;
  double log_value(int k, int n) const;
  /// lambda_n e_{k-1}^{n-1} / e_k^n, with n 1-based.
  double select_probability(int k, int n) const;
};

ESPTable esp_table(const std::vector<double>& lambda, int K);

struct DualRepresentation {
  Eigen::MatrixXcd C;
  Eigen::VectorXd lambda;    // descending
  Eigen::MatrixXcd vectors;  // Euclidean-orthonormal columns
};

DualRepresentation make_dual(const FeatureMap& map);

/// Phase 1 index selection.
std::vector<int> select_dpp(const Eigen::VectorXd& lambda, RngStream& rng);
std::vector<int> select_kdpp(const ESPTable& table, int k, RngStream& rng);

/// Selected eigenvectors rescaled to unit C-norm.
std::vector<Eigen::VectorXcd> phase1_dpp(const DualRepresentation& dual, RngStream& rng);
std::vector<Eigen::VectorXcd> phase1_kdpp(const DualRepresentation& dual, int k, RngStream& rng);

struct Phase2Trace {
  /// max |v_i^* C v_j - delta_ij| after each update.
  std::vector<double> orthonormality_drift;
};

SampleSet phase2_sample(const FeatureMap& map, const Eigen::MatrixXcd& C, std::vector<Eigen::VectorXcd> vs,
                        RngStream& rng, Phase2Trace* trace = nullptr);

/// A fixed map with its eigendecomposed dual matrix, reused across draws.
class DualSampler {
 public:
  explicit DualSampler(FeatureMap map);

  const FeatureMap& map() const { return map_; }
  const DualRepresentation& dual() const { return dual_; }

  /// Variable-size DPP draw when k is empty, k-DPP draw otherwise.
  SampleSet sample(RngStream& rng, std::optional<int> k = std::nullopt) const;

 private:
  FeatureMap map_;
  DualRepresentation dual_;
};

SampleSet sample_dpp(const KernelSpec& kernel, MapKind method, int D, RngStream& rng);
SampleSet sample_kdpp(const KernelSpec& kernel, MapKind method, int D, int k, RngStream& rng);

}  // namespace cdpp
