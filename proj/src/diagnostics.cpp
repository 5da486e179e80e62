#include "cdpp/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "cdpp/error.hpp"

namespace cdpp {

namespace {

void check_chain(const std::vector<SampleSet>& chain, std::size_t min_len, const char* who) {
  if (chain.size() < min_len) throw ConfigError(std::string(who) + ": chain too short");
  const std::size_t k = chain.front().size();
  if (k == 0) throw ConfigError(std::string(who) + ": empty sets");
  for (const auto& s : chain)
    if (s.size() != k) throw ConfigError(std::string(who) + ": sets differ in size");
}

// Returns -1 when the truncation lag lies beyond the available lags.
int truncation_lag(const std::vector<double>& rho, EssTruncation rule, bool complete) {
  const int max_lag = static_cast<int>(rho.size()) - 1;
  int delta = 1;
  for (; 2 * delta + 1 <= max_lag; ++delta) {
    const double pair = rho[2 * delta] + rho[2 * delta + 1];
    if (rule == EssTruncation::verbatim ? pair > 0.0 : pair <= 0.0)
      return rule == EssTruncation::verbatim ? 2 * delta + 1 : 2 * delta - 1;
  }
  return complete ? max_lag : -1;
}

double alpha_from_sum(double sum) {
  const double a = 1.0 / (1.0 + 2.0 * sum);
  if (!(a > 0.0) || !std::isfinite(a)) return 1e-300;
  return std::min(a, 1.0);
}

// Centered copy of x with its sum of squares.
double center(std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  double c0 = 0.0, scale = 0.0;
  for (double& v : x) {
    scale = std::max(scale, std::abs(v));
    v -= mean;
    c0 += v * v;
  }
  if (!(c0 > 1e-24 * x.size() * std::max(scale * scale, 1e-300))) throw NumericError("ess_alpha: zero-variance chain");
  return c0;
}

double lag_product(const std::vector<double>& x, int s) {
  double c = 0.0;
  for (std::size_t t = 0; t + s < x.size(); ++t) c += x[t] * x[t + s];
  return c;
}

// Mean autocorrelation over series, with lags computed in growing blocks
// until the truncation point is known.
double ess_from_series(std::vector<std::vector<double>> xs, EssTruncation rule) {
  std::vector<double> c0(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) c0[i] = center(xs[i]);
  const int T = static_cast<int>(xs.front().size());
  std::vector<double> rho{1.0};
  int want = std::min(T - 1, 64);
  while (true) {
    for (int s = static_cast<int>(rho.size()); s <= want; ++s) {
      double r = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) r += lag_product(xs[i], s) / c0[i];
      rho.push_back(r / xs.size());
    }
    const int last = truncation_lag(rho, rule, want == T - 1);
    if (last >= 0) {
      double sum = 0.0;
      for (int s = 1; s <= last; ++s) sum += rho[s];
      return alpha_from_sum(sum);
    }
    want = std::min(T - 1, 2 * want);
  }
}

}  // namespace

double average_movement(const std::vector<SampleSet>& chain) {
  check_chain(chain, 2, "average_movement");
  const std::size_t k = chain.front().size();
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < chain.size(); ++t)
    for (std::size_t i = 0; i < k; ++i) sum += (chain[t + 1][i] - chain[t][i]).squaredNorm();
  return sum / (static_cast<double>(chain.size() - 1) * k);
}

std::vector<SampleSet> sort_matched(const std::vector<SampleSet>& chain) {
  std::vector<SampleSet> out = chain;
  for (auto& s : out) {
    for (const auto& x : s)
      if (x.size() != 1) throw ConfigError("sort_matched: sets must be one-dimensional");
    std::sort(s.begin(), s.end(), [](const Point& a, const Point& b) { return a[0] < b[0]; });
  }
  return out;
}

std::vector<double> mean_autocorrelation(const std::vector<SampleSet>& chain, int max_lag) {
  check_chain(chain, 2, "mean_autocorrelation");
  const std::size_t k = chain.front().size();
  max_lag = std::min<int>(max_lag, static_cast<int>(chain.size()) - 1);
  std::vector<double> mean(max_lag + 1, 0.0), x(chain.size());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t t = 0; t < chain.size(); ++t) x[t] = chain[t][i][0];
    const double c0 = center(x);
    for (int s = 0; s <= max_lag; ++s) mean[s] += lag_product(x, s) / c0 / k;
  }
  return mean;
}

double ess_alpha(const std::vector<SampleSet>& chain, EssTruncation rule) {
  if (chain.size() < 10) throw ConfigError("ess_alpha: chain length must be at least 10");
  check_chain(chain, 10, "ess_alpha");
  std::vector<std::vector<double>> xs(chain.front().size(), std::vector<double>(chain.size()));
  for (std::size_t t = 0; t < chain.size(); ++t)
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i][t] = chain[t][i][0];
  return ess_from_series(std::move(xs), rule);
}

double ess_alpha(const std::vector<double>& series, EssTruncation rule) {
  if (series.size() < 10) throw ConfigError("ess_alpha: chain length must be at least 10");
  return ess_from_series({series}, rule);
}

std::vector<double> nearest_distances(const SampleSet& reference, const SampleSet& candidates, Exec exec) {
  if (reference.empty() || candidates.empty()) throw ConfigError("coverage: empty point set");
  const Eigen::Index d = reference.front().size();
  for (const auto& c : candidates)
    if (c.size() != d) throw ConfigError("coverage: dimension mismatch");
  std::vector<double> out(reference.size());
  parallel_for(reference.size(), exec, [&](std::size_t i) {
    if (reference[i].size() != d) throw ConfigError("coverage: dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) best = std::min(best, (reference[i] - c).squaredNorm());
    out[i] = std::sqrt(best);
  });
  return out;
}

double coverage_rate(const SampleSet& reference, const SampleSet& candidates, double eps) {
  if (!(eps > 0.0)) throw ConfigError("coverage: eps must be positive");
  const std::vector<double> nn = nearest_distances(reference, candidates);
  const auto hit = std::count_if(nn.begin(), nn.end(), [eps](double v) { return v <= eps; });
  return static_cast<double>(hit) / nn.size();
}

double epsilon_for_coverage(std::vector<double> nearest, double fraction) {
  if (nearest.empty()) throw ConfigError("coverage: empty distances");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("coverage: fraction must be in (0, 1]");
  std::sort(nearest.begin(), nearest.end());
  const auto need = static_cast<std::size_t>(std::ceil(fraction * nearest.size() - 1e-9));
  return nearest[std::max<std::size_t>(need, 1) - 1];
}

Eigen::VectorXd sample_mean(const SampleSet& xs) {
  if (xs.empty()) throw ConfigError("sample_mean: empty set");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(xs.front().size());
  for (const auto& x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

Eigen::MatrixXd sample_covariance(const SampleSet& xs) {
  if (xs.size() < 2) throw ConfigError("sample_covariance: need at least two points");
  const Eigen::VectorXd m = sample_mean(xs);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m.size(), m.size());
  for (const auto& x : xs) c += (x - m) * (x - m).transpose();
  return c / static_cast<double>(xs.size() - 1);
}

CoverageRun coverage_experiment(const SampleSet& reference, const SampleSet& dpp_sample, RngStream& rng, Exec exec) {
  if (dpp_sample.empty()) throw ConfigError("coverage: empty DPP sample");
  const Eigen::VectorXd m = sample_mean(dpp_sample);
  Eigen::MatrixXd c = sample_covariance(dpp_sample);
  c.diagonal().array() += 1e-8;
  SampleSet iid(dpp_sample.size());
  for (auto& x : iid) x = rng.mvn(m, c);
  return {nearest_distances(reference, dpp_sample, exec), nearest_distances(reference, iid, exec)};
}

CoverageCurves coverage_curves(const std::vector<CoverageRun>& runs, int grid_points) {
  if (runs.empty() || grid_points < 2) throw ConfigError("coverage_curves: need runs and at least two grid points");
  double top = 0.0;
  for (const auto& r : runs) {
    for (double v : r.nearest_dpp) top = std::max(top, v);
    for (double v : r.nearest_iid) top = std::max(top, v);
  }
  CoverageCurves out;
  out.epsilon.resize(grid_points);
  out.dpp.assign(grid_points, 0.0);
  out.iid.assign(grid_points, 0.0);
  for (int g = 0; g < grid_points; ++g) out.epsilon[g] = top * g / (grid_points - 1);
  auto accumulate = [&](std::vector<double> nn, std::vector<double>& curve) {
    std::sort(nn.begin(), nn.end());
    for (int g = 0; g < grid_points; ++g) {
      const auto hit = std::upper_bound(nn.begin(), nn.end(), out.epsilon[g]) - nn.begin();
      curve[g] += static_cast<double>(hit) / nn.size() / runs.size();
    }
  };
  for (const auto& r : runs) {
    accumulate(r.nearest_dpp, out.dpp);
    accumulate(r.nearest_iid, out.iid);
  }
  return out;
}

KernelSpec coverage_kernel(const SampleSet& reference) {
  const Eigen::MatrixXd cov = sample_covariance(reference);
  QualitySpec q{QualityKind::gaussian, sample_mean(reference), 0.5 * cov};
  SimilaritySpec s;
  s.kind = SimilarityKind::gaussian;
  s.cov = cov;
  return KernelSpec(q, s, Domain{});
}

SampleSet rare_mode_data(int n, int d, RngStream& rng, std::vector<int>* rare) {
  if (n < 1 || d < 1) throw ConfigError("rare_mode_data: n and d must be positive");
  SampleSet out(n);
  if (rare) rare->assign(n, 0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    const bool r = rng.uniform() < 0.02;
    for (int j = 0; j < d; ++j) x[j] = r ? rng.normal(j == 0 ? 5.0 : 0.0, 0.1) : rng.normal();
    out[i] = x;
    if (rare && r) (*rare)[i] = 1;
  }
  return out;
}

}  // namespace cdpp
