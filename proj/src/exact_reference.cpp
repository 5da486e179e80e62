#include "cdpp/exact_reference.hpp"

#include <cmath>
#include <limits>

#include "cdpp/dual_sampler.hpp"
#include "cdpp/error.hpp"
#include "cdpp/linalg.hpp"
#include "cdpp/numerics.hpp"

namespace cdpp {

double log_esp(const std::vector<double>& lambda, int k) {
  const ESPTable t = esp_table(lambda, k);
  return t.log_value(k, t.D);
}

double log_esp_grouped(const std::vector<EigenGroup>& groups, int k) {
  if (k < 0) throw ConfigError("log_esp_grouped: k must be nonnegative");
  double top = 0.0;
  for (const auto& g : groups) top = std::max(top, g.value);
  if (!(top > 0.0)) return k == 0 ? 0.0 : -kInf;
  // Coefficients of the scaled polynomial prod (1 + t v/top)^m, truncated at t^k.
  std::vector<double> poly(k + 1, 0.0);
  poly[0] = 1.0;
  std::vector<double> factor(k + 1), next(k + 1);
  for (const auto& g : groups) {
    const double v = g.value / top;
    factor[0] = 1.0;
    for (int j = 1; j <= k; ++j) factor[j] = factor[j - 1] * (g.multiplicity - (j - 1)) / j * v;
    std::fill(next.begin(), next.end(), 0.0);
    for (int a = 0; a <= k; ++a) {
      if (poly[a] == 0.0) continue;
      for (int b = 0; a + b <= k; ++b) next[a + b] += poly[a] * factor[b];
    }
    poly.swap(next);
  }
  if (!(poly[k] > 0.0)) return -kInf;
  return std::log(poly[k]) + k * std::log(top);
}

double kdpp_log_prob(double log_ek, const Eigen::MatrixXd& lx) {
  const double ld = log_det_psd(lx);
  if (!(ld > -kInf)) return -kInf;
  return ld - log_ek;
}

double kdpp_log_prob(const std::vector<double>& lambda, const Eigen::MatrixXd& lx) {
  return kdpp_log_prob(log_esp(lambda, static_cast<int>(lx.rows())), lx);
}

Eigen::MatrixXd approx_kernel_matrix(const FeatureMap& map, const SampleSet& xs) {
  Eigen::MatrixXcd b(map.rank(), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = map.eval_B(xs[i]);
  const Eigen::MatrixXd m = (b.adjoint() * b).real();
  return 0.5 * (m + m.transpose());
}

namespace {

void isotropic_params(const KernelSpec& kernel, double& rho2, double& sigma2) {
  const auto& q = kernel.quality();
  const auto& s = kernel.similarity();
  if (q.kind != QualityKind::gaussian || s.kind != SimilarityKind::gaussian || kernel.domain().bounded)
    throw ConfigError("estimate_tv: exact eigenvalues need a gaussian/gaussian kernel on all of R^d");
  const int d = kernel.dim();
  rho2 = q.cov(0, 0);
  sigma2 = s.cov(0, 0);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  if ((q.cov - rho2 * id).cwiseAbs().maxCoeff() > 1e-14 * rho2 || (s.cov - sigma2 * id).cwiseAbs().maxCoeff() > 1e-14 * sigma2)
    throw ConfigError("estimate_tv: exact eigenvalues need isotropic covariances");
}

}  // namespace

TvEstimate estimate_tv(const FeatureMap& map, int k, int n_samples, RngStream& rng, Exec exec) {
  if (k < 1 || n_samples < 1) throw ConfigError("estimate_tv: k and n_samples must be positive");
  TvEstimate out;
  isotropic_params(map.kernel(), out.rho2, out.sigma2);
  out.method = map.kind();
  out.rank = map.rank();
  out.k = k;
  out.d = map.kernel().dim();

  const double log_ek_exact = log_esp_grouped(gaussian_eigen_groups(out.rho2, out.sigma2, out.d), k);
  const DualSampler sampler(map);
  std::vector<double> lam(sampler.dual().lambda.data(), sampler.dual().lambda.data() + sampler.dual().lambda.size());
  const double log_ek_approx = log_esp(lam, k);
  if (!(log_ek_approx > -kInf)) throw NumericError("estimate_tv: approximate kernel has rank below k");

  std::vector<double> vals(n_samples, std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<std::size_t>(n_samples), exec, [&](std::size_t i) {
    RngStream r = rng.split(i);
    const SampleSet xs = sampler.sample(r, k);
    const double lp = kdpp_log_prob(log_ek_exact, kernel_matrix(map.kernel(), xs));
    const double lq = kdpp_log_prob(log_ek_approx, approx_kernel_matrix(map, xs));
    const double ratio = std::exp(lp - lq);
    if (std::isfinite(ratio) && ratio >= 0.0 && ratio <= 1e6) vals[i] = 0.5 * std::abs(ratio - 1.0);
  });

  double sum = 0.0, sum2 = 0.0;
  for (double v : vals) {
    if (std::isnan(v)) {
      ++out.n_excluded;
      continue;
    }
    ++out.n_samples;
    sum += v;
    sum2 += v * v;
  }
  if (out.n_samples == 0) throw NumericError("estimate_tv: every importance ratio was excluded");
  const double n = out.n_samples;
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0)) : 0.0;
  out.mean = std::clamp(mean, 0.0, 1.0);
  out.std_error = std::sqrt(var / n);
  return out;
}

TvEstimate estimate_tv(const KernelSpec& kernel, MapKind method, int D, int k, int n_samples, RngStream& rng,
                       Exec exec) {
  const FeatureMap map = build_map(kernel, method, D, rng);
  RngStream samples = rng.split(0x7f4a7c15);
  return estimate_tv(map, k, n_samples, samples, exec);
}

}  // namespace cdpp
