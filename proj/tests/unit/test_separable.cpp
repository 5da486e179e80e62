#include <doctest.h>

#include <cmath>
#include <random>

#include "cdpp/error.hpp"
#include "cdpp/numerics.hpp"
#include "cdpp/separable.hpp"
#include "quad_oracle.hpp"

using namespace cdpp;

namespace {

double quad_re(const AxisFactor& f, double a, double b) {
  oracle::QuadOptions o;
  o.abs_floor = 1e-14;
  return oracle::quad_oracle([&](const std::vector<double>& x) { return f.value(x[0]).real(); }, {a}, {b}, o);
}

double quad_im(const AxisFactor& f, double a, double b) {
  oracle::QuadOptions o;
  o.abs_floor = 1e-14;
  return oracle::quad_oracle([&](const std::vector<double>& x) { return f.value(x[0]).imag(); }, {a}, {b}, o);
}

// A signed 2-d density that stays nonnegative: a broad Gaussian minus a
// smaller, narrower one, plus an oscillating pair written as two conjugate terms.
SeparableDensity test_density() {
  SeparableDensity d(Eigen::Vector2d(-kInf, -kInf), Eigen::Vector2d(kInf, kInf));
  d.add({1.0, {{0.5, 0.2, 0.0, 0}, {0.4, -0.3, 0.0, 0}}});
  d.add({-0.3, {{1.5, 0.0, 0.0, 0}, {1.2, 0.0, 0.0, 0}}});
  d.add({cplx(0.05, 0.02), {{0.7, 0.1, 1.3, 0}, {0.6, 0.0, -0.4, 0}}});
  d.add({cplx(0.05, -0.02), {{0.7, 0.1, -1.3, 0}, {0.6, 0.0, 0.4, 0}}});
  return d;
}

}  // namespace

TEST_SUITE("separable") {
  TEST_CASE("axis_integral matches quadrature for random factors") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double inf = kInf;
    for (int rep = 0; rep < 60; ++rep) {
      AxisFactor f;
      f.precision = 0.1 + 3.0 * U(gen);
      f.center = -2.0 + 4.0 * U(gen);
      const int kind = rep % 3;
      if (kind == 0) f.freq = -4.0 + 8.0 * U(gen);
      if (kind == 1) f.power = 1 + rep % 4;
      double a = -inf, b = inf;
      if (rep % 2 == 0) {
        a = -3.0 + 2.0 * U(gen);
        b = a + 0.05 + 3.0 * U(gen);
      } else if (rep % 4 == 1) {
        a = -1.0 + 2.0 * U(gen);
      }
      const cplx v = axis_integral(f, a, b);
      const double re = quad_re(f, a, b);
      const double im = f.freq != 0.0 ? quad_im(f, a, b) : 0.0;
      const double scale = std::max(1e-12, axis_abs_bound(f, a, b));
      CHECK(std::abs(v.real() - re) <= 1e-9 * scale);
      CHECK(std::abs(v.imag() - im) <= 1e-9 * scale);
    }
  }

  TEST_CASE("flat factors integrate polynomially or as sinc") {
    AxisFactor flat;
    flat.power = 2;
    CHECK(axis_integral(flat, -1.0, 2.0).real() == doctest::Approx(3.0).epsilon(1e-14));
    AxisFactor osc;
    osc.freq = 2.0;
    const cplx v = axis_integral(osc, 0.0, 1.0);
    CHECK(std::abs(v - (std::exp(cplx(0.0, 2.0)) - 1.0) / cplx(0.0, 2.0)) < 1e-14);
    CHECK_THROWS(axis_integral(flat, 0.0, kInf));
  }

  TEST_CASE("multiply reproduces the pointwise product") {
    const AxisFactor a{0.7, 0.3, 1.1, 1};
    const AxisFactor b{1.9, -0.8, -0.4, 2};
    double lc = 0.0;
    const AxisFactor p = multiply(a, b, lc);
    for (double y : {-1.3, 0.0, 0.4, 2.2}) {
      const cplx want = a.value(y) * b.value(y);
      CHECK(std::abs(std::exp(lc) * p.value(y) - want) <= 1e-13 * std::abs(want) + 1e-300);
    }
  }

  TEST_CASE("mass and conditional CDFs match quadrature") {
    const SeparableDensity d = test_density();
    oracle::QuadOptions o;
    o.abs_floor = 1e-12;
    // Every term is below e^-50 outside this box.
    const double inf = 12.0;
    const double mass = oracle::quad_oracle(
        [&](const std::vector<double>& x) { return d.eval(Eigen::Vector2d(x[0], x[1])); }, {-inf, -inf}, {inf, inf}, o);
    CHECK(d.mass() == doctest::Approx(mass).epsilon(1e-8));

    const AxisConditional c0 = d.conditional(0, {});
    for (double t : {-2.0, -0.1, 0.9, 3.0}) {
      const double part = oracle::quad_oracle(
          [&](const std::vector<double>& x) { return d.eval(Eigen::Vector2d(x[0], x[1])); }, {-inf, -inf}, {t, inf}, o);
      CHECK(c0.cdf(t) == doctest::Approx(part / mass).epsilon(1e-8));
    }
    const double y0 = 0.37;
    const std::vector<double> prefix{y0};
    const AxisConditional c1 = d.conditional(1, prefix);
    const double row = oracle::quad_oracle([&](const std::vector<double>& x) { return d.eval(Eigen::Vector2d(y0, x[0])); },
                                            {-inf}, {inf}, o);
    for (double t : {-1.5, 0.2, 1.1}) {
      const double part = oracle::quad_oracle(
          [&](const std::vector<double>& x) { return d.eval(Eigen::Vector2d(y0, x[0])); }, {-inf}, {t}, o);
      CHECK(c1.cdf(t) == doctest::Approx(part / row).epsilon(1e-8));
      CHECK(c1.density(t) == doctest::Approx(d.eval(Eigen::Vector2d(y0, t)) / row).epsilon(1e-8));
    }
  }

  TEST_CASE("conditional CDFs are monotone with limits 0 and 1") {
    const SeparableDensity d = test_density();
    const AxisConditional c = d.conditional(0, {});
    CHECK(std::abs(c.cdf(-kInf)) < 1e-12);
    CHECK(std::abs(c.cdf(kInf) - 1.0) < 1e-12);
    double prev = 0.0;
    for (double t = -8.0; t <= 8.0; t += 0.01) {
      const double v = c.cdf(t);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    for (double u : {0.01, 0.3, 0.77, 0.999}) CHECK(std::abs(c.cdf(c.draw(u)) - u) < 1e-9);
  }

  TEST_CASE("sample moments follow the density") {
    SeparableDensity d(Eigen::VectorXd::Constant(1, -kInf), Eigen::VectorXd::Constant(1, kInf));
    d.add({1.0, {{0.5, 1.5, 0.0, 0}}});  // N(1.5, 1)
    RngStream rng(3);
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double y = d.sample(rng)[0];
      s += y;
      s2 += y * y;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean - 1.5) < 4.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) < 0.05);
  }

  TEST_CASE("bounded domains keep draws inside") {
    SeparableDensity d(Eigen::Vector2d(0.0, -1.0), Eigen::Vector2d(1.0, 2.0));
    d.add({1.0, {{0.0, 0.0, 0.0, 2}, {3.0, 0.5, 0.0, 0}}});
    RngStream rng(9);
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd y = d.sample(rng);
      CHECK(y[0] >= 0.0);
      CHECK(y[0] <= 1.0);
      CHECK(y[1] >= -1.0);
      CHECK(y[1] <= 2.0);
    }
  }

  TEST_CASE("polynomial helpers") {
    const Poly a = poly_linear(Eigen::Vector2d(2.0, -1.0), 0.5);
    const Poly b = poly_pow(a, 3);
    const Eigen::Vector2d y(0.3, 1.7);
    const double av = 0.5 + 2.0 * 0.3 - 1.7;
    CHECK(poly_eval(b, y) == doctest::Approx(av * av * av).epsilon(1e-14));
    Poly c = poly_constant(2, 1.0);
    poly_axpy(2.0, poly_mul(a, a), c);
    CHECK(poly_eval(c, y) == doctest::Approx(1.0 + 2.0 * av * av).epsilon(1e-14));
  }
}
