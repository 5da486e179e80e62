#include "cdpp/dual_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdpp/error.hpp"
#include "cdpp/linalg.hpp"
#include "cdpp/numerics.hpp"

namespace cdpp {

double ESPTable::value(int k, int n) const { return std::exp(log_value(k, n)); }

double ESPTable::log_value(int k, int n) const {
  if (k < 0 || k > K || n < 0 || n > D) throw ConfigError("esp: index out of range");
  const double v = e[k][n];
  if (!(v > 0.0)) return -kInf;
  return std::log(v) + col_log_scale[n] + k * std::log(lambda_scale);
}

double ESPTable::select_probability(int k, int n) const {
  if (k < 1 || k > K || n < 1 || n > D) throw ConfigError("esp: index out of range");
  const double den = e[k][n];
  if (!(den > 0.0)) return 0.0;
  return lambda[n - 1] * e[k - 1][n - 1] / den * std::exp(col_log_scale[n - 1] - col_log_scale[n]);
}

ESPTable esp_table(const std::vector<double>& lambda, int K) {
  if (K < 0) throw ConfigError("esp: K must be nonnegative");
  ESPTable t;
  t.K = K;
  t.D = static_cast<int>(lambda.size());
  double top = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0)) throw ConfigError("esp: eigenvalues must be nonnegative");
    top = std::max(top, l);
  }
  t.lambda_scale = top > 0.0 ? top : 1.0;
  t.lambda.resize(t.D);
  for (int n = 0; n < t.D; ++n) t.lambda[n] = lambda[n] / t.lambda_scale;
  t.e.assign(K + 1, std::vector<double>(t.D + 1, 0.0));
  t.col_log_scale.assign(t.D + 1, 0.0);
  for (int n = 0; n <= t.D; ++n) t.e[0][n] = 1.0;
  for (int n = 1; n <= t.D; ++n) {
    double big = 0.0;
    for (int k = 1; k <= K; ++k) {
      t.e[k][n] = t.e[k][n - 1] + t.lambda[n - 1] * t.e[k - 1][n - 1];
      big = std::max(big, t.e[k][n]);
    }
    t.col_log_scale[n] = t.col_log_scale[n - 1];
    if (big > 1e300) {
      for (int k = 0; k <= K; ++k) t.e[k][n] /= big;
      t.col_log_scale[n] += std::log(big);
    }
  }
  return t;
}

DualRepresentation make_dual(const FeatureMap& map) {
  DualRepresentation d;
  d.C = dual_matrix(map);
  const HermitianEig eig = hermitian_eig(d.C);
  d.lambda = eig.values.cwiseMax(0.0);
  d.vectors = eig.vectors;
  return d;
}

std::vector<int> select_dpp(const Eigen::VectorXd& lambda, RngStream& rng) {
  std::vector<int> out;
  for (Eigen::Index n = 0; n < lambda.size(); ++n) {
    const double l = lambda[n];
    if (l > 0.0 && rng.uniform() < l / (l + 1.0)) out.push_back(static_cast<int>(n));
  }
  return out;
}

std::vector<int> select_kdpp(const ESPTable& table, int k, RngStream& rng) {
  if (k < 0 || k > table.K) throw ConfigError("select_kdpp: k exceeds the table");
  if (k > 0 && !(table.e[k][table.D] > 0.0))
    throw NumericError("k-DPP: fewer than " + std::to_string(k) + " nonzero eigenvalues");
  std::vector<int> out;
  int remaining = k;
  for (int n = table.D; n >= 1 && remaining > 0; --n) {
    if (rng.uniform() < table.select_probability(remaining, n)) {
      out.push_back(n - 1);
      --remaining;
    }
  }
  if (remaining != 0) throw NumericError("k-DPP: selection ended early");
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

std::vector<Eigen::VectorXcd> normalized(const DualRepresentation& dual, const std::vector<int>& idx) {
  std::vector<Eigen::VectorXcd> vs;
  vs.reserve(idx.size());
  for (int i : idx) {
    Eigen::VectorXcd v = dual.vectors.col(i);
    const double n2 = v.dot(dual.C * v).real();
    if (!(n2 > 0.0)) throw NumericError("phase1: selected eigenvector has zero C-norm");
    vs.push_back(v / std::sqrt(n2));
  }
  return vs;
}

double c_drift(const std::vector<Eigen::VectorXcd>& vs, const Eigen::MatrixXcd& c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = 0; j < vs.size(); ++j)
      worst = std::max(worst, std::abs(vs[i].dot(c * vs[j]) - cplx(i == j ? 1.0 : 0.0)));
  return worst;
}

}  // namespace

std::vector<Eigen::VectorXcd> phase1_dpp(const DualRepresentation& dual, RngStream& rng) {
  return normalized(dual, select_dpp(dual.lambda, rng));
}

std::vector<Eigen::VectorXcd> phase1_kdpp(const DualRepresentation& dual, int k, RngStream& rng) {
  if (k > dual.lambda.size()) throw ConfigError("k-DPP: k exceeds the rank D");
  std::vector<double> lam(dual.lambda.data(), dual.lambda.data() + dual.lambda.size());
  return normalized(dual, select_kdpp(esp_table(lam, k), k, rng));
}

SampleSet phase2_sample(const FeatureMap& map, const Eigen::MatrixXcd& C, std::vector<Eigen::VectorXcd> vs,
                        RngStream& rng, Phase2Trace* trace) {
  SampleSet xs;
  const KernelSpec& kern = map.kernel();
  while (!vs.empty()) {
    const SeparableDensity dens = map.phase2_density(vs);
    const Point x = kern.from_frame(dens.sample(rng));
    xs.push_back(x);
    if (vs.size() == 1) break;

    const Eigen::VectorXcd b = map.eval_B(x);
    std::vector<cplx> dots(vs.size());
    std::size_t pivot = 0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      dots[i] = vs[i].dot(b);  // v^* B(x)
      if (std::abs(dots[i]) > std::abs(dots[pivot])) pivot = i;
    }
    if (!(std::abs(dots[pivot]) > 1e-12))
      throw NumericError("phase2: every |v^* B(x)| is below 1e-12 at a sampled point");
    const Eigen::VectorXcd v0 = vs[pivot];
    std::vector<Eigen::VectorXcd> next;
    next.reserve(vs.size() - 1);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i == pivot) continue;
      next.push_back(vs[i] - std::conj(dots[i] / dots[pivot]) * v0);
    }
    vs = gram_schmidt_c(std::move(next), C);
    if (trace) trace->orthonormality_drift.push_back(c_drift(vs, C));
  }
  return xs;
}

DualSampler::DualSampler(FeatureMap map) : map_(std::move(map)), dual_(make_dual(map_)) {}

SampleSet DualSampler::sample(RngStream& rng, std::optional<int> k) const {
  std::vector<Eigen::VectorXcd> vs;
  if (k) {
    vs = phase1_kdpp(dual_, *k, rng);
  } else {
    vs = normalized(dual_, select_dpp(dual_.lambda, rng));
  }
  if (vs.empty()) return {};
  return phase2_sample(map_, dual_.C, std::move(vs), rng);
}

SampleSet sample_dpp(const KernelSpec& kernel, MapKind method, int D, RngStream& rng) {
  return DualSampler(build_map(kernel, method, D, rng)).sample(rng);
}

SampleSet sample_kdpp(const KernelSpec& kernel, MapKind method, int D, int k, RngStream& rng) {
  if (k < 0) throw ConfigError("k must be nonnegative");
  return DualSampler(build_map(kernel, method, D, rng)).sample(rng, k);
}

}  // namespace cdpp
