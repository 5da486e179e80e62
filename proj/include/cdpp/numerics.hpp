#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "cdpp/error.hpp"
#include "cdpp/types.hpp"

namespace cdpp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSqrtPi = 1.7724538509055160273;

/// Real error function.
double erf_real(double x);

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz), valid on the whole plane.
/// Upper half-plane values use Weideman's rational expansion with a Laplace
/// continued fraction for large |z|; the lower half-plane is reached through
/// w(z) = 2 exp(-z^2) - w(-z).
cplx faddeeva(cplx z);

/// Complex error function for |Im z| <= 30; throws ConfigError outside.
cplx erf_complex(cplx z);

struct InvertOptions {
  double tolerance = 1e-10;  // |F(x) - u|
  int max_iterations = 200;
  /// Allowed decrease of F across the bracket before declaring the CDF broken.
  double monotone_slack = 1e-8;
};

/// Finds x in [lo, hi] with F(x) ~= u for a nondecreasing F. Illinois-style
/// false-position steps, with bisection whenever the secant step stalls.
template <class Cdf>
double invert_monotone_cdf(Cdf&& cdf, double lo, double hi, double u, const InvertOptions& opt = {}) {
  if (!(lo < hi)) throw ConfigError("invert_monotone_cdf: empty bracket");
  double flo = cdf(lo) - u;
  double fhi = cdf(hi) - u;
  if (flo > opt.tolerance) throw NumericError("invert_monotone_cdf: F(lo) exceeds target");
  if (fhi < -opt.tolerance) throw NumericError("invert_monotone_cdf: F(hi) below target");
  if (std::abs(flo) <= opt.tolerance && flo >= -opt.tolerance && std::abs(fhi) > opt.tolerance) return lo;
  if (std::abs(fhi) <= opt.tolerance && std::abs(flo) > opt.tolerance) return hi;

  // flo/fhi carry Illinois-scaled values; tlo/thi keep the true ones.
  double tlo = flo, thi = fhi;
  int side = 0;
  double x = 0.5 * (lo + hi);
  double last_width = hi - lo;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double width = hi - lo;
    // Bisect when two false-position steps failed to halve the bracket.
    const bool bisect = (it % 2 == 1) && width > 0.5 * last_width;
    if (it % 2 == 1) last_width = width;
    double cand = (!bisect && fhi != flo) ? lo - flo * width / (fhi - flo) : 0.5 * (lo + hi);
    if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
    x = cand;
    const double fx = cdf(x) - u;
    if (fx < tlo - opt.monotone_slack || fx > thi + opt.monotone_slack)
      throw NumericError("invert_monotone_cdf: CDF not monotone (violation " +
                         std::to_string(std::max(tlo - fx, fx - thi)) + ")");
    if (std::abs(fx) <= opt.tolerance) return x;
    if (fx < 0.0) {
      lo = x;
      flo = tlo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = thi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return x;
  }
  return x;
}

}  // namespace cdpp
