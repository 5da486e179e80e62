#include "cdpp/separable.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cdpp/error.hpp"
#include "cdpp/numerics.hpp"

namespace cdpp {

namespace {

// erf(b) - erf(a) for a <= b without cancellation in the tails.
double erf_diff(double a, double b) {
  if (a >= 0.0) return std::erfc(a) - std::erfc(b);
  if (b <= 0.0) return std::erfc(-b) - std::erfc(-a);
  return std::erf(b) - std::erf(a);
}

double ipow(double y, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= y;
  return r;
}

struct LegendreRule {
  std::array<double, 32> x, w;
};

const LegendreRule& legendre32() {
  static const LegendreRule rule = [] {
    LegendreRule r;
    constexpr int n = 32;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.x[i] = x;
      r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

// int_a^b y^n exp(-(y-m)^2/s^2) dy. Narrow finite intervals use a fixed
// Gauss-Legendre rule; otherwise upward recursion in n from the erf form.
double gauss_power_integral(double m, double s, int n, double a, double b) {
  if (n > 0 && std::isfinite(a) && std::isfinite(b) && b - a <= 2.0 * s) {
    const LegendreRule& r = legendre32();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 32; ++i) {
      const double y = mid + half * r.x[i];
      const double u = (y - m) / s;
      acc += r.w[i] * ipow(y, n) * std::exp(-u * u);
    }
    return half * acc;
  }
  const double j0 = 0.5 * kSqrtPi * s * erf_diff((a - m) / s, (b - m) / s);
  if (n == 0) return j0;
  auto edge = [&](double y, int k) {
    if (!std::isfinite(y)) return 0.0;
    const double u = (y - m) / s;
    return ipow(y, k) * std::exp(-u * u);
  };
  const double h = 0.5 * s * s;
  double prev = 0.0, cur = j0;
  for (int k = 0; k < n; ++k) {
    const double next = m * cur + h * (k * prev - (edge(b, k) - edge(a, k)));
    prev = cur;
    cur = next;
  }
  return cur;
}

// int_u^inf exp(-t^2 + 2ivt) dt for u >= 0.
cplx upper_tail(double u, double v) {
  if (u == kInf) return 0.0;
  return 0.5 * kSqrtPi * std::exp(cplx(-u * u, 2.0 * u * v)) * faddeeva(cplx(v, u));
}

// int_-inf^u exp(-t^2 + 2ivt) dt for u <= 0.
cplx lower_tail(double u, double v) {
  if (u == -kInf) return 0.0;
  return 0.5 * kSqrtPi * std::exp(cplx(-u * u, 2.0 * u * v)) * faddeeva(cplx(-v, -u));
}

cplx oscillatory_integral(double m, double s, double omega, double a, double b) {
  const double v = 0.5 * s * omega;
  const double ua = (a - m) / s;
  const double ub = (b - m) / s;
  cplx inner;
  if (ua >= 0.0) {
    inner = upper_tail(ua, v) - upper_tail(ub, v);
  } else if (ub <= 0.0) {
    inner = lower_tail(ub, v) - lower_tail(ua, v);
  } else {
    inner = kSqrtPi * std::exp(-v * v) - lower_tail(ua, v) - upper_tail(ub, v);
  }
  return s * std::exp(cplx(0.0, omega * m)) * inner;
}

}  // namespace

cplx AxisFactor::value(double y) const {
  const double d = y - center;
  return ipow(y, power) * std::exp(cplx(-precision * d * d, freq * y));
}

double AxisFactor::log_abs(double y) const {
  const double d = y - center;
  double r = -precision * d * d;
  if (power > 0) r += (y == 0.0) ? -kInf : power * std::log(std::abs(y));
  return r;
}

double AxisFactor::phase(double y) const {
  double r = freq * y;
  if (y < 0.0 && (power % 2) == 1) r += std::numbers::pi;
  return r;
}

AxisFactor multiply(const AxisFactor& a, const AxisFactor& b, double& log_const) {
  AxisFactor r;
  r.precision = a.precision + b.precision;
  r.freq = a.freq + b.freq;
  r.power = a.power + b.power;
  log_const = 0.0;
  if (a.precision > 0.0 && b.precision > 0.0) {
    r.center = (a.precision * a.center + b.precision * b.center) / r.precision;
    const double d = a.center - b.center;
    log_const = -(a.precision * b.precision / r.precision) * d * d;
  } else if (a.precision > 0.0) {
    r.center = a.center;
  } else if (b.precision > 0.0) {
    r.center = b.center;
  }
  return r;
}

cplx axis_integral(const AxisFactor& f, double a, double b) {
  if (a == b) return 0.0;
  if (a > b) return -axis_integral(f, b, a);
  if (f.precision <= 0.0) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw ConfigError("flat factor over an unbounded axis");
    if (f.freq == 0.0) return (ipow(b, f.power + 1) - ipow(a, f.power + 1)) / (f.power + 1);
    if (f.power != 0) throw ConfigError("oscillating polynomial factor is not supported");
    const double h = b - a;
    const double x = 0.5 * f.freq * h;
    const double sinc = (std::abs(x) < 1e-8) ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    return h * sinc * std::exp(cplx(0.0, 0.5 * f.freq * (a + b)));
  }
  const double s = 1.0 / std::sqrt(f.precision);
  if (f.freq == 0.0) return gauss_power_integral(f.center, s, f.power, a, b);
  if (f.power != 0) throw ConfigError("oscillating polynomial factor is not supported");
  return oscillatory_integral(f.center, s, f.freq, a, b);
}

double axis_abs_bound(const AxisFactor& f, double a, double b) {
  if (a > b) std::swap(a, b);
  if (f.precision <= 0.0) {
    return (b - a) * ipow(std::max(std::abs(a), std::abs(b)), f.power);
  }
  const double s = 1.0 / std::sqrt(f.precision);
  const double mass = gauss_power_integral(f.center, s, 0, a, b);
  if (f.power == 0) return mass;
  double reach = std::abs(f.center) + 6.0 * s + 1.0;
  if (std::isfinite(a) && std::isfinite(b)) reach = std::min(reach, std::max(std::abs(a), std::abs(b)));
  return mass * ipow(reach, f.power) + std::abs(gauss_power_integral(f.center, s, f.power, a, b));
}

SeparableDensity::SeparableDensity(Eigen::VectorXd lo, Eigen::VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw ConfigError("SeparableDensity: bound size mismatch");
  for (int l = 0; l < lo_.size(); ++l)
    if (!(lo_[l] < hi_[l])) throw ConfigError("SeparableDensity: empty axis range");
}

void SeparableDensity::add(SepTerm t) {
  if (static_cast<int>(t.factors.size()) != dim()) throw ConfigError("SeparableDensity: term dimension mismatch");
  terms_.push_back(std::move(t));
}

void SeparableDensity::multiply_axis(int axis, const AxisFactor& g) {
  for (auto& t : terms_) {
    double lc = 0.0;
    t.factors[axis] = multiply(t.factors[axis], g, lc);
    t.coef *= std::exp(lc);
  }
}

double SeparableDensity::eval(const Eigen::VectorXd& y) const {
  for (int l = 0; l < dim(); ++l)
    if (y[l] < lo_[l] || y[l] > hi_[l]) return 0.0;
  double acc = 0.0;
  for (const auto& t : terms_) {
    cplx v = t.coef;
    for (int l = 0; l < dim(); ++l) v *= t.factors[l].value(y[l]);
    acc += v.real();
  }
  return acc;
}

double SeparableDensity::mass() const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    cplx v = t.coef;
    for (int l = 0; l < dim(); ++l) v *= axis_integral(t.factors[l], lo_[l], hi_[l]);
    acc += v.real();
  }
  return acc;
}

double SeparableDensity::abs_mass() const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    double v = std::abs(t.coef);
    for (int l = 0; l < dim(); ++l) v *= axis_abs_bound(t.factors[l], lo_[l], hi_[l]);
    acc += v;
  }
  return acc;
}

AxisConditional SeparableDensity::conditional(int axis, std::span<const double> prefix) const {
  return conditional_impl(axis, prefix, nullptr);
}

AxisConditional SeparableDensity::conditional_impl(int axis, std::span<const double> prefix,
                                                   const std::vector<std::vector<cplx>>* integrals) const {
  if (axis < 0 || axis >= dim()) throw ConfigError("conditional: axis out of range");
  if (static_cast<int>(prefix.size()) < axis) throw ConfigError("conditional: prefix too short");
  const std::size_t n = terms_.size();
  std::vector<double> logmag(n, -kInf), phase(n, 0.0), prune(n, -kInf);
  double top = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = terms_[i];
    if (t.coef == 0.0) continue;
    double lm = std::log(std::abs(t.coef));
    double ph = std::arg(t.coef);
    for (int j = 0; j < axis; ++j) {
      lm += t.factors[j].log_abs(prefix[j]);
      ph += t.factors[j].phase(prefix[j]);
    }
    for (int j = axis + 1; j < dim() && lm > -kInf; ++j) {
      const cplx in = integrals ? (*integrals)[i][j] : axis_integral(t.factors[j], lo_[j], hi_[j]);
      if (in == 0.0) {
        lm = -kInf;
        break;
      }
      lm += std::log(std::abs(in));
      ph += std::arg(in);
    }
    if (!(lm > -kInf)) continue;
    const double b = axis_abs_bound(t.factors[axis], lo_[axis], hi_[axis]);
    if (!(b > 0.0)) continue;
    logmag[i] = lm;
    phase[i] = ph;
    prune[i] = lm + std::log(b);
    top = std::max(top, prune[i]);
  }
  if (!(top > -kInf)) throw NumericError("conditional: density vanishes on this slice");
  const double cut = top + std::log(1e-17);
  std::vector<cplx> w;
  std::vector<AxisFactor> f;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(prune[i] >= cut)) continue;
    w.push_back(std::polar(std::exp(logmag[i] - top), phase[i]));
    f.push_back(terms_[i].factors[axis]);
  }
  return AxisConditional(lo_[axis], hi_[axis], std::move(w), std::move(f));
}

Eigen::VectorXd SeparableDensity::sample(RngStream& rng) const {
  std::vector<std::vector<cplx>> integrals(terms_.size(), std::vector<cplx>(dim()));
  if (dim() > 1) {
    for (std::size_t i = 0; i < terms_.size(); ++i)
      for (int j = 1; j < dim(); ++j) integrals[i][j] = axis_integral(terms_[i].factors[j], lo_[j], hi_[j]);
  }
  Eigen::VectorXd y(dim());
  for (int l = 0; l < dim(); ++l) {
    const AxisConditional c =
        conditional_impl(l, std::span<const double>(y.data(), static_cast<std::size_t>(l)), &integrals);
    y[l] = c.draw(rng.uniform());
  }
  return y;
}

AxisConditional::AxisConditional(double lo, double hi, std::vector<cplx> weights, std::vector<AxisFactor> factors)
    : lo_(lo), hi_(hi), w_(std::move(weights)), f_(std::move(factors)) {
  double z = 0.0, mag = 0.0, moment = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    z += (w_[i] * axis_integral(f_[i], lo_, hi_)).real();
    const double b = std::abs(w_[i]) * axis_abs_bound(f_[i], lo_, hi_);
    mag += b;
    moment += b * f_[i].center;
  }
  if (!(z > 0.0)) throw NumericError("conditional: nonpositive mass " + std::to_string(z));
  z_ = z;
  cancel_ = mag / z;
  split_ = std::clamp(moment / mag, lo_, hi_);
}

double AxisConditional::cdf(double t) const {
  if (t <= lo_) return 0.0;
  if (t >= hi_) return 1.0;
  // Each side is summed from its own end so tail values keep relative accuracy.
  double acc = 0.0;
  if (t <= split_) {
    for (std::size_t i = 0; i < w_.size(); ++i) acc += (w_[i] * axis_integral(f_[i], lo_, t)).real();
    return acc / z_;
  }
  for (std::size_t i = 0; i < w_.size(); ++i) acc += (w_[i] * axis_integral(f_[i], t, hi_)).real();
  return 1.0 - acc / z_;
}

double AxisConditional::density(double t) const {
  if (t < lo_ || t > hi_) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) acc += (w_[i] * f_[i].value(t)).real();
  return acc / z_;
}

double AxisConditional::draw(double u) const {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  InvertOptions opt;
  opt.monotone_slack = std::max(1e-8, 512.0 * eps * cancel_);
  double a = lo_, b = hi_;
  if (!std::isfinite(a) || !std::isfinite(b)) {
    double left = kInf, right = -kInf;
    for (const auto& f : f_) {
      const double s = 1.0 / std::sqrt(f.precision);
      left = std::min(left, f.center - 10.0 * s);
      right = std::max(right, f.center + 10.0 * s);
    }
    if (std::isfinite(a)) left = std::max(left, a);
    if (std::isfinite(b)) right = std::min(right, b);
    if (!(left < right)) {
      left = std::isfinite(a) ? a : right - 1.0;
      right = std::isfinite(b) ? b : left + 1.0;
    }
    double width = right - left;
    for (int i = 0; i < 60 && !std::isfinite(a) && cdf(left) > u; ++i) {
      left -= width;
      width *= 2.0;
    }
    width = right - left;
    for (int i = 0; i < 60 && !std::isfinite(b) && cdf(right) < u; ++i) {
      right += width;
      width *= 2.0;
    }
    a = left;
    b = right;
  }
  return invert_monotone_cdf([this](double t) { return cdf(t); }, a, b, u, opt);
}

Poly poly_constant(int dim, double c) {
  Poly p;
  if (c != 0.0) p[std::vector<int>(dim, 0)] = c;
  return p;
}

Poly poly_linear(const Eigen::VectorXd& coef, double c0) {
  const int d = static_cast<int>(coef.size());
  Poly p = poly_constant(d, c0);
  for (int l = 0; l < d; ++l) {
    if (coef[l] == 0.0) continue;
    std::vector<int> e(d, 0);
    e[l] = 1;
    p[e] += coef[l];
  }
  return p;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      std::vector<int> e(ea.size());
      for (std::size_t l = 0; l < e.size(); ++l) e[l] = ea[l] + eb[l];
      r[e] += ca * cb;
    }
  }
  return r;
}

Poly poly_pow(const Poly& a, int p) {
  if (p < 0) throw ConfigError("poly_pow: negative exponent");
  const int d = a.empty() ? 0 : static_cast<int>(a.begin()->first.size());
  Poly r = poly_constant(d, 1.0);
  for (int i = 0; i < p; ++i) r = poly_mul(r, a);
  return r;
}

void poly_axpy(double alpha, const Poly& x, Poly& y) {
  for (const auto& [e, c] : x) y[e] += alpha * c;
}

double poly_eval(const Poly& p, const Eigen::VectorXd& y) {
  double acc = 0.0;
  for (const auto& [e, c] : p) {
    double t = c;
    for (std::size_t l = 0; l < e.size(); ++l) t *= ipow(y[l], e[l]);
    acc += t;
  }
  return acc;
}

}  // namespace cdpp
