#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cdpp {

/// Seedable random stream. Identical (seed, stream) pairs reproduce the same
/// sequence; child streams are derived by hashing so parallel workers can each
/// own an independent, reproducible stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Independent child stream keyed by `id`.
  RngStream split(std::uint64_t id) const;

  double uniform();  // (0, 1)
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double sd);
  double gamma(double shape, double scale);
  double inverse_gamma(double shape, double scale);
  double cauchy(double location, double scale);
  double laplace(double location, double scale);
  std::size_t categorical(std::span<const double> probs);
  std::vector<double> dirichlet(std::span<const double> alpha);
  Eigen::VectorXd mvn_diag(const Eigen::VectorXd& mean, const Eigen::VectorXd& var);
  Eigen::VectorXd mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);
  /// Uniformly random permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace cdpp
