#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cdpp/kernel.hpp"
#include "cdpp/rng.hpp"
#include "cdpp/separable.hpp"
#include "cdpp/types.hpp"

namespace cdpp {

enum class MapKind { rff, nystrom };

const char* map_kind_name(MapKind k);
MapKind parse_map_kind(const std::string& s);

/// Low-rank feature map B: R^d -> C^D with L~(x, y) = B(x)^* B(y).
class FeatureMap {
 public:
  MapKind kind() const { return kind_; }
  int rank() const { return rank_; }
  const KernelSpec& kernel() const { return kernel_; }

  /// RFF frequencies, one per row (D x d).
  const Eigen::MatrixXd& frequencies() const { return omega_; }
  const SampleSet& landmarks() const { return landmarks_; }
  /// Nystrom weights W = L_Z^{-1/2} (pseudo-inverse square root).
  const Eigen::MatrixXd& weights() const { return w_; }

  Eigen::VectorXcd eval_B(const Point& x) const;
  double approx_kernel(const Point& x, const Point& y) const;

  /// Phase-2 density (1/|V|) sum_v |v^* B(x)|^2 in frame coordinates.
  SeparableDensity phase2_density(const std::vector<Eigen::VectorXcd>& vs) const;

  nlohmann::json to_json() const;
  /// Rebuilds the map; Nystrom weights are recomputed from the landmarks.
  static FeatureMap from_json(const nlohmann::json& j);

  static FeatureMap rff(KernelSpec kernel, Eigen::MatrixXd omega);
  static FeatureMap nystrom(KernelSpec kernel, SampleSet landmarks);

 private:
  explicit FeatureMap(KernelSpec kernel) : kernel_(std::move(kernel)) {}

  MapKind kind_ = MapKind::rff;
  int rank_ = 0;
  KernelSpec kernel_;
  Eigen::MatrixXd omega_;
  Eigen::MatrixXd omega_frame_;
  SampleSet landmarks_;
  Eigen::MatrixXd w_;
};

FeatureMap build_rff(const KernelSpec& kernel, int D, RngStream& rng);
FeatureMap build_nystrom(const KernelSpec& kernel, int D, RngStream& rng);
FeatureMap build_map(const KernelSpec& kernel, MapKind kind, int D, RngStream& rng);

/// Landmark draws with density proportional to q on the domain.
SampleSet draw_from_quality(const KernelSpec& kernel, int n, RngStream& rng);

/// C = integral of B(x) B(x)^*, in closed form.
Eigen::MatrixXcd dual_matrix(const FeatureMap& map, Exec exec = Exec::serial);

Eigen::VectorXcd eval_B(const FeatureMap& map, const Point& x);

/// CDF along frame axis `axis` of the Phase-2 density, with earlier frame
/// coordinates fixed at `prefix` and later ones integrated out.
double phase2_cdf(const FeatureMap& map, const std::vector<Eigen::VectorXcd>& vs, int axis,
                  std::span<const double> prefix, double t);

}  // namespace cdpp
