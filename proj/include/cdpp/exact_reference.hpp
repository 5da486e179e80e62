#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cdpp/feature_maps.hpp"
#include "cdpp/kernel.hpp"
#include "cdpp/parallel.hpp"
#include "cdpp/rng.hpp"

namespace cdpp {

/// log e_k over an explicit eigenvalue list; -inf when e_k = 0.
double log_esp(const std::vector<double>& lambda, int k);

/// log e_k over grouped eigenvalues (value, multiplicity), computed as the
/// t^k coefficient of prod_g (1 + t v_g)^{m_g}.
double log_esp_grouped(const std::vector<EigenGroup>& groups, int k);

/// log det(L_X) - log_ek; -inf when L_X is singular.
double kdpp_log_prob(double log_ek, const Eigen::MatrixXd& lx);
double kdpp_log_prob(const std::vector<double>& lambda, const Eigen::MatrixXd& lx);

/// Kernel matrix of the low-rank approximation, Re B(X)^* B(X).
Eigen::MatrixXd approx_kernel_matrix(const FeatureMap& map, const SampleSet& xs);

struct TvEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_samples = 0;   // samples that entered the average
  int n_excluded = 0;  // ratio outside [0, 1e6] or not finite
  MapKind method = MapKind::nystrom;
  int rank = 0;
  int k = 0;
  int d = 0;
  double rho2 = 0.0;
  double sigma2 = 0.0;
};

/// 1/2 E|P_L(X)/P_L~(X) - 1| under X from the approximate k-DPP, for an
/// isotropic gaussian/gaussian kernel. One map is built from `rng`; sample i
/// uses rng.split(i).
TvEstimate estimate_tv(const KernelSpec& kernel, MapKind method, int D, int k, int n_samples, RngStream& rng,
                       Exec exec = Exec::serial);

/// Same estimator for a prebuilt map.
TvEstimate estimate_tv(const FeatureMap& map, int k, int n_samples, RngStream& rng, Exec exec = Exec::serial);

}  // namespace cdpp
