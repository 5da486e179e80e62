#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdpp/rng.hpp"
#include "cdpp/types.hpp"

namespace cdpp {

/// One-dimensional factor y^power * exp(-precision*(y-center)^2 + i*freq*y).
/// precision == 0 is a flat factor, only integrable over finite bounds.
struct AxisFactor {
  double precision = 0.0;
  double center = 0.0;
  double freq = 0.0;
  int power = 0;

  cplx value(double y) const;
  /// log|value| and arg(value); log_abs is -inf at a zero of y^power.
  double log_abs(double y) const;
  double phase(double y) const;
};

/// Product of two factors; `log_const` receives the constant split off when
/// completing the square.
AxisFactor multiply(const AxisFactor& a, const AxisFactor& b, double& log_const);

/// Integral of the factor over [a, b]; either end may be infinite.
cplx axis_integral(const AxisFactor& f, double a, double b);

/// Upper bound on the integral of |factor| over [a, b].
double axis_abs_bound(const AxisFactor& f, double a, double b);

struct SepTerm {
  cplx coef{1.0, 0.0};
  std::vector<AxisFactor> factors;
};

class AxisConditional;

/// Density f(y) = Re sum_t c_t prod_l phi_{t,l}(y_l) on a product domain.
class SeparableDensity {
 public:
  SeparableDensity(Eigen::VectorXd lo, Eigen::VectorXd hi);

  int dim() const { return static_cast<int>(lo_.size()); }
  const Eigen::VectorXd& lower() const { return lo_; }
  const Eigen::VectorXd& upper() const { return hi_; }
  const std::vector<SepTerm>& terms() const { return terms_; }

  void add(SepTerm t);
  /// Multiplies every term by the same factor along `axis`.
  void multiply_axis(int axis, const AxisFactor& g);

  double eval(const Eigen::VectorXd& y) const;
  /// Integral over the whole domain.
  double mass() const;
  /// Sum over terms of |c_t| times the bound on the integral of |term|.
  double abs_mass() const;

  /// Conditional along `axis` given the first `axis` coordinates in `prefix`,
  /// with the remaining axes integrated out.
  AxisConditional conditional(int axis, std::span<const double> prefix) const;

  /// Draw by sequential conditioning, one inverse-CDF step per axis.
  Eigen::VectorXd sample(RngStream& rng) const;

 private:
  AxisConditional conditional_impl(int axis, std::span<const double> prefix,
                                   const std::vector<std::vector<cplx>>* integrals) const;

  Eigen::VectorXd lo_, hi_;
  std::vector<SepTerm> terms_;
};

class AxisConditional {
 public:
  AxisConditional(double lo, double hi, std::vector<cplx> weights, std::vector<AxisFactor> factors);

  double lower() const { return lo_; }
  double upper() const { return hi_; }
  /// Unnormalized mass; scale is arbitrary but consistent within this object.
  double normalizer() const { return z_; }
  /// Ratio of cancelled magnitude to the mass; drives the monotonicity slack.
  double cancellation() const { return cancel_; }
  double cdf(double t) const;
  double density(double t) const;  // normalized
  double draw(double u) const;

 private:
  double lo_, hi_;
  std::vector<cplx> w_;
  std::vector<AxisFactor> f_;
  double z_ = 0.0;
  double cancel_ = 1.0;
  double split_ = 0.0;
};

/// Sparse multivariate polynomial keyed by exponent vectors.
using Poly = std::map<std::vector<int>, double>;

Poly poly_constant(int dim, double c);
/// c0 + sum_l coef[l] y_l
Poly poly_linear(const Eigen::VectorXd& coef, double c0);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_pow(const Poly& a, int p);
void poly_axpy(double alpha, const Poly& x, Poly& y);
double poly_eval(const Poly& p, const Eigen::VectorXd& y);

}  // namespace cdpp
