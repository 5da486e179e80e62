#include "cdpp/numerics.hpp"

#include <array>

namespace cdpp {
namespace {

constexpr int kTerms = 40;

struct WeidemanTable {
  double L;
  std::array<double, kTerms> a;  // a[n] multiplies Z^n
};

// Coefficients of the rational expansion, computed once by a direct DFT.
const WeidemanTable& weideman() {
  static const WeidemanTable table = [] {
    WeidemanTable t{};
    const int M = 2 * kTerms;
    const int M2 = 2 * M;
    t.L = std::sqrt(kTerms / std::sqrt(2.0));
    std::vector<double> f(M2, 0.0);
    for (int k = -M + 1; k <= M - 1; ++k) {
      const double theta = k * M_PI / M;
      const double s = t.L * std::tan(theta / 2.0);
      f[k + M] = std::exp(-s * s) * (t.L * t.L + s * s);
    }
    // fftshift then forward DFT; only bins 1..kTerms are needed.
    std::vector<double> g(M2);
    for (int i = 0; i < M2; ++i) g[i] = f[(i + M) % M2];
    for (int n = 1; n <= kTerms; ++n) {
      double acc = 0.0;
      for (int j = 0; j < M2; ++j) acc += g[j] * std::cos(2.0 * M_PI * double(j) * n / M2);
      t.a[n - 1] = acc / M2;
    }
    return t;
  }();
  return table;
}

cplx faddeeva_continued_fraction(cplx z) {
  // w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))
  cplx tail = z;
  for (int k = 60; k >= 1; --k) tail = z - (0.5 * k) / tail;
  return cplx(0.0, 1.0 / kSqrtPi) / tail;
}

cplx faddeeva_upper(cplx z) {
  if (std::abs(z) > 12.0) return faddeeva_continued_fraction(z);
  const auto& t = weideman();
  const cplx iz(-z.imag(), z.real());
  const cplx denom = t.L - iz;
  const cplx Z = (t.L + iz) / denom;
  cplx p = t.a[kTerms - 1];
  for (int n = kTerms - 2; n >= 0; --n) p = p * Z + t.a[n];
  return 2.0 * p / (denom * denom) + (1.0 / kSqrtPi) / denom;
}

cplx erf_series(cplx z) {
  // 2/sqrt(pi) sum (-1)^n z^(2n+1) / (n! (2n+1)), used for |z| small.
  const cplx z2 = z * z;
  cplx term = z;
  cplx sum = z;
  for (int n = 1; n < 60; ++n) {
    term *= -z2 / double(n);
    const cplx add = term / double(2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return sum * (2.0 / kSqrtPi);
}

}  // namespace

double erf_real(double x) { return std::erf(x); }

cplx faddeeva(cplx z) {
  if (z.imag() >= 0.0) return faddeeva_upper(z);
  return 2.0 * std::exp(-z * z) - faddeeva_upper(-z);
}

cplx erf_complex(cplx z) {
  if (!(std::abs(z.imag()) <= 30.0) || !std::isfinite(z.real()))
    throw ConfigError("erf_complex: argument outside the stability region |Im z| <= 30");
  if (z.imag() == 0.0) return erf_real(z.real());
  if (std::abs(z) < 0.5) return erf_series(z);
  // erf(z) = 1 - exp(-z^2) w(iz) with Re z >= 0; odd symmetry otherwise.
  const bool flip = z.real() < 0.0;
  const cplx zz = flip ? -z : z;
  const cplx r = 1.0 - std::exp(-zz * zz) * faddeeva(cplx(-zz.imag(), zz.real()));
  return flip ? -r : r;
}

}  // namespace cdpp
