#include "cdpp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cdpp/error.hpp"

namespace cdpp {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::uint64_t a = splitmix64(seed);
  std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

RngStream RngStream::split(std::uint64_t id) const {
  return RngStream(seed_, splitmix64(stream_ * 0x9e3779b97f4a7c15ULL + id + 1));
}

double RngStream::uniform() {
  // 53 random bits, shifted off zero.
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return u + 0x1.0p-54;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::normal(double mean, double sd) {
  if (!(sd >= 0.0)) throw ConfigError("normal: standard deviation must be nonnegative");
  return mean + sd * normal();
}

double RngStream::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw ConfigError("gamma: shape and scale must be positive");
  return std::gamma_distribution<double>(shape, scale)(engine_);
}

double RngStream::inverse_gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw ConfigError("inverse_gamma: shape and scale must be positive");
  return 1.0 / gamma(shape, 1.0 / scale);
}

double RngStream::cauchy(double location, double scale) {
  if (!(scale > 0.0)) throw ConfigError("cauchy: scale must be positive");
  return location + scale * std::tan(M_PI * (uniform() - 0.5));
}

double RngStream::laplace(double location, double scale) {
  if (!(scale > 0.0)) throw ConfigError("laplace: scale must be positive");
  const double e = -std::log(uniform());
  return uniform() < 0.5 ? location - scale * e : location + scale * e;
}

std::size_t RngStream::categorical(std::span<const double> probs) {
  if (probs.empty()) throw ConfigError("categorical: empty probability vector");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ConfigError("categorical: negative probability");
    total += p;
  }
  if (!(total > 0.0)) throw ConfigError("categorical: probabilities sum to zero");
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Roundoff: return the last index with positive mass.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

std::vector<double> RngStream::dirichlet(std::span<const double> alpha) {
  if (alpha.empty()) throw ConfigError("dirichlet: empty concentration vector");
  std::vector<double> g(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    g[i] = gamma(alpha[i], 1.0);
    total += g[i];
  }
  if (!(total > 0.0)) {
    // All draws underflowed (tiny concentrations); fall back to a vertex.
    std::fill(g.begin(), g.end(), 0.0);
    g[categorical(alpha)] = 1.0;
    return g;
  }
  for (double& x : g) x /= total;
  return g;
}

Eigen::VectorXd RngStream::mvn_diag(const Eigen::VectorXd& mean, const Eigen::VectorXd& var) {
  if (mean.size() != var.size()) throw ConfigError("mvn_diag: dimension mismatch");
  Eigen::VectorXd x(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    if (!(var[i] >= 0.0)) throw ConfigError("mvn_diag: negative variance");
    x[i] = mean[i] + std::sqrt(var[i]) * normal();
  }
  return x;
}

Eigen::VectorXd RngStream::mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) throw ConfigError("mvn: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw ConfigError("mvn: covariance is not positive definite");
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal();
  return mean + llt.matrixL() * z;
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform() * static_cast<double>(i));
    std::swap(p[i - 1], p[std::min(j, i - 1)]);
  }
  return p;
}

}  // namespace cdpp
