#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdpp/error.hpp"
#include "cdpp/numerics.hpp"
#include "cdpp/repulsive_mixture.hpp"
#include "quad_oracle.hpp"

using namespace cdpp;

namespace {

MixtureState two_component_state(const std::vector<double>& y) {
  MixtureState s;
  s.pi = {0.5, 0.5};
  s.mu = {-1.0, 1.0};
  s.sigma2 = {1.0, 1.0};
  s.z.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s.z[i] = y[i] < 0.0 ? 0 : 1;
  return s;
}

double log_npdf(double y, double m, double v) { return -0.5 * (std::log(2 * M_PI * v) + (y - m) * (y - m) / v); }

}  // namespace

TEST_SUITE("repulsive_mixture") {
  TEST_CASE("hungarian finds the minimum-cost assignment") {
    RngStream rng(61);
    for (int rep = 0; rep < 30; ++rep) {
      const int n = 1 + rep % 6;
      Eigen::MatrixXd c(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = std::floor(rng.uniform(0.0, 10.0));
      const auto a = hungarian(c);
      double got = 0.0;
      for (int i = 0; i < n; ++i) got += c(i, a[i]);
      std::vector<int> p(n);
      std::iota(p.begin(), p.end(), 0);
      double best = kInf;
      do {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += c(i, p[i]);
        best = std::min(best, v);
      } while (std::next_permutation(p.begin(), p.end()));
      CHECK(got == best);
    }
  }

  TEST_CASE("metrics on hand-built chains") {
    const std::vector<double> y{-2.0, -1.5, 1.2, 2.5};
    const std::vector<int> labels{0, 0, 1, 1};
    MixtureState one;
    one.pi = {1.0};
    one.mu = {0.0};
    one.sigma2 = {1.0};
    one.z = {0, 0, 0, 0};
    CHECK(compute_metrics({one}, y, nullptr, nullptr, {}).membership_entropy == 0.0);

    MixtureState perfect = two_component_state(y);
    std::swap(perfect.mu[0], perfect.mu[1]);
    for (auto& z : perfect.z) z = 1 - z;  // relabelled, still a perfect split
    CHECK(*compute_metrics({perfect}, y, &labels, nullptr, {}).clustering_error == 0.0);

    MixtureState same = two_component_state(y);
    same.mu = {0.3, 0.3};
    CHECK(compute_metrics({same}, y, nullptr, nullptr, {}).membership_entropy ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }

  TEST_CASE("held-out likelihood is scored in original units") {
    const std::vector<double> y{-1.0, 0.0, 1.0};
    MixtureState s;
    s.pi = {1.0};
    s.mu = {0.0};
    s.sigma2 = {1.0};
    s.z = {0, 0, 0};
    Standardizer scale;
    scale.mean = 10.0;
    scale.sd = 2.0;
    const std::vector<double> held{12.0};
    const auto m = compute_metrics({s}, y, nullptr, &held, scale);
    CHECK(*m.heldout_loglik == doctest::Approx(log_npdf(12.0, 10.0, 4.0)).epsilon(1e-14));
  }

  TEST_CASE("DPP mean conditional matches quadrature") {
    RngStream rng(62);
    MixtureModelSpec spec;
    spec.prior = PriorKind::dpp;
    spec.K = 3;
    for (int rep = 0; rep < 10; ++rep) {
      MixtureState s;
      s.pi = {0.3, 0.3, 0.4};
      s.mu = {rng.normal(), rng.normal(), rng.normal()};
      s.sigma2 = {rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
      std::vector<double> y(8);
      s.z.resize(8);
      for (int i = 0; i < 8; ++i) {
        y[i] = rng.normal();
        s.z[i] = static_cast<int>(rng.uniform() * 3);
      }
      const int k = rep % 3;
      const SeparableDensity dens = dpp_mean_conditional(spec, s, y, k);
      const KernelSpec kern = mixture_prior_kernel(spec);
      SampleSet others;
      for (int j = 0; j < 3; ++j)
        if (j != k) others.push_back(Eigen::VectorXd::Constant(1, s.mu[j]));
      const Eigen::MatrixXd minv = kernel_matrix(kern, others).inverse();
      auto f = [&](double mu) {
        const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, mu);
        Eigen::VectorXd ell(others.size());
        for (std::size_t i = 0; i < others.size(); ++i) ell[i] = eval_L(kern, others[i], p);
        double lik = 0.0;
        int nk = 0;
        double ybar = 0.0;
        for (int i = 0; i < 8; ++i)
          if (s.z[i] == k) {
            ++nk;
            ybar += y[i];
          }
        if (nk) lik = -nk * (mu - ybar / nk) * (mu - ybar / nk) / (2 * s.sigma2[k]);
        return (eval_L(kern, p, p) - ell.dot(minv * ell)) * std::exp(lik);
      };
      const double inf = kInf;
      const double z = oracle::quad_oracle([&](const std::vector<double>& x) { return f(x[0]); }, {-inf}, {inf});
      CHECK(dens.mass() == doctest::Approx(z).epsilon(1e-6));
      const AxisConditional c = dens.conditional(0, {});
      for (double t : {-1.0, 0.0, 0.8}) {
        const double part = oracle::quad_oracle([&](const std::vector<double>& x) { return f(x[0]); }, {-inf}, {t});
        CHECK(c.cdf(t) == doctest::Approx(part / z).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("DPP conditional reduces to the IID conditional when other means are far away") {
    MixtureModelSpec spec;
    spec.prior = PriorKind::dpp;
    spec.K = 2;
    const std::vector<double> y{0.2, 0.5, -0.1};
    MixtureState s;
    s.pi = {0.5, 0.5};
    s.mu = {0.0, 8.0};
    s.sigma2 = {0.7, 1.0};
    s.z = {0, 0, 0};
    const AxisConditional c = dpp_mean_conditional(spec, s, y, 0).conditional(0, {});
    // Normal posterior with the IID prior N(mu0, sigma0^2).
    const double prec = 1.0 / spec.sigma0_2 + 3 / 0.7;
    const double mean = (0.6 / 0.7) / prec;
    for (double t : {-0.5, 0.1, 0.4})
      CHECK(c.cdf(t) == doctest::Approx(0.5 * std::erfc(-(t - mean) * std::sqrt(prec / 2.0))).epsilon(1e-10));
  }

  TEST_CASE("IID means with no data are prior draws") {
    MixtureModelSpec spec;
    spec.K = 2;
    spec.mu0 = 0.7;
    spec.sigma0_2 = 2.0;
    const std::vector<double> y{-5.0};
    RngStream rng(63);
    double s = 0.0, s2 = 0.0;
    int n = 0;
    MixtureState st = init_mog(y, spec, rng);
    for (int it = 0; it < 20000; ++it) {
      gibbs_step_mog(st, y, spec, rng);
      const int empty = st.z[0] == 0 ? 1 : 0;
      s += st.mu[empty];
      s2 += st.mu[empty] * st.mu[empty];
      ++n;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean - 0.7) < 0.06);
    CHECK(var == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("run_mog keeps floor((n - b) / thin) states and is deterministic") {
    RngStream g(64);
    const SyntheticData d = synthetic_mixture(SyntheticKind::poor_sep, 40, g);
    const std::vector<double> ys = Standardizer::fit(d.y).apply(d.y);
    for (PriorKind p : {PriorKind::iid, PriorKind::dpp}) {
      MixtureModelSpec spec;
      spec.prior = p;
      RngStream a(65), b(65);
      const auto ca = run_mog(ys, spec, 107, 50, 4, a);
      const auto cb = run_mog(ys, spec, 107, 50, 4, b);
      CHECK(ca.size() == (107 - 50) / 4);
      for (std::size_t t = 0; t < ca.size(); ++t) {
        CHECK(ca[t].mu == cb[t].mu);
        CHECK(std::abs(std::accumulate(ca[t].pi.begin(), ca[t].pi.end(), 0.0) - 1.0) < 1e-12);
        for (double v : ca[t].sigma2) CHECK(v > 0.0);
      }
    }
    RngStream r(66);
    CHECK_THROWS_AS(run_mog(ys, {}, 10, 10, 1, r), ConfigError);
  }

  TEST_CASE("standardizer and generators") {
    const Standardizer s = Standardizer::fit({1.0, 2.0, 3.0});
    CHECK(s.mean == 2.0);
    CHECK(s.sd == 1.0);
    CHECK_THROWS_AS(Standardizer::fit({1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(parse_synthetic_kind("far"), ConfigError);
    CHECK_THROWS_AS(parse_prior_kind("beta"), ConfigError);
    RngStream rng(67);
    const SyntheticData d = synthetic_mixture(SyntheticKind::well_sep, 2000, rng);
    double m0 = 0.0, n0 = 0.0;
    for (std::size_t i = 0; i < d.y.size(); ++i)
      if (d.labels[i] == 0) {
        m0 += d.y[i];
        ++n0;
      }
    CHECK(m0 / n0 == doctest::Approx(-2.0).epsilon(0.05));
  }
}
