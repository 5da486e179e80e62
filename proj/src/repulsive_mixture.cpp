#include "cdpp/repulsive_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "cdpp/error.hpp"
#include "cdpp/numerics.hpp"
#include "cdpp/schur_gibbs.hpp"

namespace cdpp {

namespace {

double log_normal_pdf(double y, double mu, double var) {
  const double d = y - mu;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

void check_spec(const MixtureModelSpec& s) {
  if (s.K < 1) throw ConfigError("mixture: K must be positive");
  if (!(s.alpha > 0.0 && s.a_sigma > 0.0 && s.b_sigma > 0.0 && s.sigma0_2 > 0.0 && s.gamma0_2 > 0.0))
    throw ConfigError("mixture: hyperparameters must be positive");
}

// Responsibilities of every component for y.
void responsibilities(const MixtureState& s, double y, std::vector<double>& r) {
  const std::size_t K = s.pi.size();
  r.resize(K);
  double top = -kInf;
  for (std::size_t k = 0; k < K; ++k) {
    r[k] = s.pi[k] > 0.0 ? std::log(s.pi[k]) + log_normal_pdf(y, s.mu[k], s.sigma2[k]) : -kInf;
    top = std::max(top, r[k]);
  }
  double z = 0.0;
  for (auto& v : r) {
    v = std::exp(v - top);
    z += v;
  }
  for (auto& v : r) v /= z;
}

}  // namespace

const char* prior_kind_name(PriorKind k) { return k == PriorKind::iid ? "iid" : "dpp"; }

PriorKind parse_prior_kind(const std::string& s) {
  if (s == "iid") return PriorKind::iid;
  if (s == "dpp") return PriorKind::dpp;
  throw ConfigError("unknown prior '" + s + "' (expected iid or dpp)");
}

Standardizer Standardizer::fit(const std::vector<double>& y) {
  if (y.size() < 2) throw ConfigError("standardize: need at least two observations");
  Standardizer s;
  s.mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double ss = 0.0;
  for (double v : y) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / (y.size() - 1));
  if (!(s.sd > 0.0)) throw ConfigError("standardize: data have zero variance");
  return s;
}

std::vector<double> Standardizer::apply(const std::vector<double>& y) const {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = (y[i] - mean) / sd;
  return out;
}

KernelSpec mixture_prior_kernel(const MixtureModelSpec& spec) {
  QualitySpec q{QualityKind::gaussian, Eigen::VectorXd::Constant(1, spec.mu0),
                Eigen::MatrixXd::Constant(1, 1, 2.0 * spec.sigma0_2)};
  SimilaritySpec s;
  s.kind = SimilarityKind::gaussian;
  s.cov = Eigen::MatrixXd::Constant(1, 1, 0.5 * spec.gamma0_2);
  return KernelSpec(q, s, Domain{});
}

SeparableDensity dpp_mean_conditional(const MixtureModelSpec& spec, const MixtureState& state,
                                      const std::vector<double>& data, int k) {
  const KernelSpec kern = mixture_prior_kernel(spec);
  SampleSet others;
  for (int j = 0; j < static_cast<int>(state.mu.size()); ++j)
    if (j != k) others.push_back(Eigen::VectorXd::Constant(1, state.mu[j]));
  SeparableDensity dens = full_conditional(kern, others);
  int nk = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (state.z[i] != k) continue;
    ++nk;
    sum += data[i];
  }
  if (nk > 0) {
    // prod_i N(y_i; mu, s2) is proportional to exp(-nk (mu - ybar)^2 / (2 s2)).
    AxisFactor tilt;
    tilt.precision = nk / (2.0 * state.sigma2[k]);
    tilt.center = sum / nk;
    dens.multiply_axis(0, tilt);
  }
  return dens;
}

MixtureState init_mog(const std::vector<double>& data, const MixtureModelSpec& spec, RngStream& rng) {
  check_spec(spec);
  MixtureState s;
  s.pi.assign(spec.K, 1.0 / spec.K);
  s.sigma2.assign(spec.K, 1.0);
  s.mu.resize(spec.K);
  for (auto& m : s.mu) m = rng.normal(spec.mu0, std::sqrt(spec.sigma0_2));
  s.z.assign(data.size(), 0);
  return s;
}

void gibbs_step_mog(MixtureState& s, const std::vector<double>& data, const MixtureModelSpec& spec, RngStream& rng) {
  const int K = spec.K;
  std::vector<double> r;
  for (std::size_t i = 0; i < data.size(); ++i) {
    responsibilities(s, data[i], r);
    s.z[i] = static_cast<int>(rng.categorical(r));
  }
  std::vector<int> nk(K, 0);
  std::vector<double> sum(K, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++nk[s.z[i]];
    sum[s.z[i]] += data[i];
  }
  std::vector<double> conc(K);
  for (int k = 0; k < K; ++k) conc[k] = spec.alpha + nk[k];
  s.pi = rng.dirichlet(conc);
  for (int k = 0; k < K; ++k) {
    double ss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (s.z[i] == k) ss += (data[i] - s.mu[k]) * (data[i] - s.mu[k]);
    s.sigma2[k] = rng.inverse_gamma(spec.a_sigma + 0.5 * nk[k], spec.b_sigma + 0.5 * ss);
  }
  for (int k = 0; k < K; ++k) {
    if (spec.prior == PriorKind::iid) {
      const double prec = 1.0 / spec.sigma0_2 + nk[k] / s.sigma2[k];
      const double mean = (spec.mu0 / spec.sigma0_2 + sum[k] / s.sigma2[k]) / prec;
      s.mu[k] = rng.normal(mean, std::sqrt(1.0 / prec));
    } else {
      const SeparableDensity dens = dpp_mean_conditional(spec, s, data, k);
      const Eigen::VectorXd y = dens.sample(rng);
      if (dens.eval(y) < -1e-8) throw NumericError("mixture: negative conditional density for a mean");
      s.mu[k] = y[0];
    }
  }
}

std::vector<MixtureState> run_mog(const std::vector<double>& data, const MixtureModelSpec& spec, long n_iter,
                                  long burn_in, long thin, RngStream& rng) {
  if (data.empty()) throw ConfigError("mixture: no data");
  if (n_iter <= burn_in || burn_in < 0 || thin < 1) throw ConfigError("mixture: need n_iter > burn_in >= 0, thin >= 1");
  MixtureState s = init_mog(data, spec, rng);
  std::vector<MixtureState> chain;
  chain.reserve(static_cast<std::size_t>((n_iter - burn_in) / thin));
  for (long t = 1; t <= n_iter; ++t) {
    gibbs_step_mog(s, data, spec, rng);
    // Random relabelling applied jointly to (pi, mu, sigma2, z).
    const std::vector<std::size_t> perm = rng.permutation(spec.K);
    MixtureState p = s;
    for (int k = 0; k < spec.K; ++k) {
      p.pi[perm[k]] = s.pi[k];
      p.mu[perm[k]] = s.mu[k];
      p.sigma2[perm[k]] = s.sigma2[k];
    }
    for (auto& z : p.z) z = static_cast<int>(perm[z]);
    s = std::move(p);
    if (t > burn_in && (t - burn_in) % thin == 0) chain.push_back(s);
  }
  return chain;
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw ConfigError("hungarian: cost matrix must be square");
  // Potentials-based O(n^3) method; 1-based internal indexing.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> out(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) out[p[j] - 1] = j - 1;
  return out;
}

MixtureMetrics compute_metrics(const std::vector<MixtureState>& chain, const std::vector<double>& data,
                               const std::vector<int>* true_labels, const std::vector<double>* heldout,
                               const Standardizer& scale) {
  if (chain.empty()) throw ConfigError("metrics: empty chain");
  MixtureMetrics m;
  std::vector<double> r;
  double ent = 0.0;
  for (const auto& s : chain) {
    for (double y : data) {
      responsibilities(s, y, r);
      for (double p : r)
        if (p > 0.0) ent -= p * std::log(p);
    }
  }
  m.membership_entropy = ent / (static_cast<double>(chain.size()) * data.size());

  if (true_labels) {
    if (true_labels->size() != data.size()) throw ConfigError("metrics: label count mismatch");
    const int L = *std::max_element(true_labels->begin(), true_labels->end()) + 1;
    const int K = static_cast<int>(chain.front().pi.size());
    const int n = std::max(K, L);
    double err = 0.0;
    for (const auto& s : chain) {
      Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t i = 0; i < data.size(); ++i) cost(s.z[i], (*true_labels)[i]) -= 1.0;
      const std::vector<int> a = hungarian(cost);
      double hit = 0.0;
      for (int k = 0; k < n; ++k) hit -= cost(k, a[k]);
      err += 1.0 - hit / data.size();
    }
    m.clustering_error = err / chain.size();
  }

  if (heldout) {
    double ll = 0.0;
    for (double y0 : *heldout) {
      const double y = (y0 - scale.mean) / scale.sd;
      double dens = 0.0;
      for (const auto& s : chain)
        for (std::size_t k = 0; k < s.pi.size(); ++k) dens += s.pi[k] * std::exp(log_normal_pdf(y, s.mu[k], s.sigma2[k]));
      dens /= chain.size();
      ll += std::log(dens) - std::log(scale.sd);
    }
    m.heldout_loglik = ll;
  }
  return m;
}

double min_mean_separation(const std::vector<MixtureState>& chain) {
  if (chain.empty()) throw ConfigError("min_mean_separation: empty chain");
  const std::size_t K = chain.front().mu.size();
  std::vector<double> avg(K, 0.0);
  for (const auto& s : chain) {
    std::vector<double> mu = s.mu;
    std::sort(mu.begin(), mu.end());
    for (std::size_t k = 0; k < K; ++k) avg[k] += mu[k] / chain.size();
  }
  double best = kInf;
  for (std::size_t k = 1; k < K; ++k) best = std::min(best, avg[k] - avg[k - 1]);
  return best;
}

SyntheticKind parse_synthetic_kind(const std::string& s) {
  if (s == "poor-sep") return SyntheticKind::poor_sep;
  if (s == "well-sep") return SyntheticKind::well_sep;
  throw ConfigError("unknown synthetic dataset '" + s + "' (expected poor-sep or well-sep)");
}

SyntheticData synthetic_mixture(SyntheticKind kind, int n, RngStream& rng) {
  if (n < 1) throw ConfigError("synthetic: n must be positive");
  const double sep = kind == SyntheticKind::poor_sep ? 1.0 : 2.0;
  SyntheticData d;
  d.y.resize(n);
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int c = rng.uniform() < 0.5 ? 0 : 1;
    d.labels[i] = c;
    d.y[i] = rng.normal(c == 0 ? -sep : sep, 1.0);
  }
  return d;
}

}  // namespace cdpp
