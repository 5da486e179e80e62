#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cdpp/kernel.hpp"
#include "cdpp/rng.hpp"
#include "cdpp/separable.hpp"

namespace cdpp {

enum class PriorKind { iid, dpp };

const char* prior_kind_name(PriorKind k);
PriorKind parse_prior_kind(const std::string& s);

struct MixtureModelSpec {
  int K = 6;
  double alpha = 1.0 / 3.0;
  double a_sigma = 2.0;
  double b_sigma = 1.0;
  double mu0 = 0.0;
  double sigma0_2 = 1.0;
  PriorKind prior = PriorKind::iid;
  double gamma0_2 = 1.0;
};

struct MixtureState {
  std::vector<double> pi, mu, sigma2;
  std::vector<int> z;
};

struct MixtureMetrics {
  double membership_entropy = 0.0;
  std::optional<double> clustering_error;
  std::optional<double> heldout_loglik;
};

/// y -> (y - mean) / sd, fitted on the training data.
struct Standardizer {
  double mean = 0.0;
  double sd = 1.0;

  static Standardizer fit(const std::vector<double>& y);
  std::vector<double> apply(const std::vector<double>& y) const;
};

/// L on the means: q = N(mu0, 2 sigma0^2), k = exp(-(m - n)^2 / gamma0^2).
KernelSpec mixture_prior_kernel(const MixtureModelSpec& spec);

/// Unnormalized full conditional of mu_k under the DPP prior, tilted by the
/// likelihood of the points currently assigned to k.
SeparableDensity dpp_mean_conditional(const MixtureModelSpec& spec, const MixtureState& state,
                                      const std::vector<double>& data, int k);

MixtureState init_mog(const std::vector<double>& data, const MixtureModelSpec& spec, RngStream& rng);

/// One sweep: indicators, weights, variances, then means.
void gibbs_step_mog(MixtureState& state, const std::vector<double>& data, const MixtureModelSpec& spec, RngStream& rng);

/// Runs n_iter sweeps with a random relabelling after each; keeps every
/// thin-th state after burn_in.
std::vector<MixtureState> run_mog(const std::vector<double>& data, const MixtureModelSpec& spec, long n_iter,
                                  long burn_in, long thin, RngStream& rng);

/// `data` and the chain are in standardized units; `heldout` is in original
/// units and scored through `scale`.
MixtureMetrics compute_metrics(const std::vector<MixtureState>& chain, const std::vector<double>& data,
                               const std::vector<int>* true_labels, const std::vector<double>* heldout,
                               const Standardizer& scale);

/// Minimum-cost assignment for a square cost matrix; result[row] = column.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

/// Minimum pairwise distance among the posterior-mean component locations,
/// after sorting each draw's means.
double min_mean_separation(const std::vector<MixtureState>& chain);

enum class SyntheticKind { poor_sep, well_sep };
SyntheticKind parse_synthetic_kind(const std::string& s);

struct SyntheticData {
  std::vector<double> y;
  std::vector<int> labels;
};

/// Equal-weight two-component mixtures with unit variances; means -1, +1
/// (poorly separated) or -2, +2 (well separated).
SyntheticData synthetic_mixture(SyntheticKind kind, int n, RngStream& rng);

}  // namespace cdpp
