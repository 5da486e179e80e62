// Closed-form integrals against quadrature, and the ESP table against subset
// enumeration.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cdpp/dual_sampler.hpp"
#include "cdpp/feature_maps.hpp"
#include "cdpp/kernel.hpp"
#include "cdpp/repulsive_mixture.hpp"
#include "cdpp/schur_gibbs.hpp"
#include "criteria.hpp"
#include "quad_oracle.hpp"

namespace acceptance {
namespace {

using namespace cdpp;

constexpr double kTol = 1e-6;
const oracle::QuadOptions kQuad{1e-9, 1e-300, 24};

Eigen::MatrixXd rotation(int d, bool axis_aligned, RngStream& rng) {
  if (d == 1 || axis_aligned) return Eigen::MatrixXd::Identity(d, d);
  const double th = rng.uniform(0.0, M_PI);
  Eigen::Matrix2d r;
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return r;
}

Eigen::MatrixXd spd(const Eigen::MatrixXd& r, double lo, double hi, RngStream& rng) {
  Eigen::VectorXd ev(r.rows());
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = rng.uniform(lo, hi);
  return r * ev.asDiagonal() * r.transpose();
}

enum class Family { gauss_gauss, gauss_linear, uniform_gauss };

const char* family_name(Family f) {
  switch (f) {
    case Family::gauss_gauss: return "gaussian-gaussian";
    case Family::gauss_linear: return "gaussian-linear";
    case Family::uniform_gauss: return "uniform-gaussian";
  }
  return "";
}

/// Random kernel of the family; box domains are axis aligned.
KernelSpec random_kernel(int d, Family fam, bool bounded, RngStream& rng) {
  const Eigen::MatrixXd r = rotation(d, bounded || fam == Family::uniform_gauss, rng);
  QualitySpec q;
  Eigen::VectorXd centre(d);
  for (int l = 0; l < d; ++l) centre[l] = rng.uniform(-0.5, 0.5);
  if (fam == Family::uniform_gauss) {
    q.kind = QualityKind::uniform;
  } else {
    q.center = centre;
    q.cov = spd(r, 0.3, 2.0, rng);
  }
  SimilaritySpec s;
  if (fam == Family::gauss_linear)
    s.kind = SimilarityKind::linear;
  else
    s.cov = spd(r, 0.2, 2.0, rng);
  Domain dom;
  if (bounded || fam == Family::uniform_gauss) {
    dom.bounded = true;
    dom.lo.resize(d);
    dom.hi.resize(d);
    for (int l = 0; l < d; ++l) {
      dom.lo[l] = centre[l] - rng.uniform(0.5, 2.0);
      dom.hi[l] = centre[l] + rng.uniform(0.5, 2.0);
    }
  }
  return KernelSpec(q, s, dom);
}

/// Finite box in frame coordinates outside which every integrand here is
/// below exp(-80) of its peak.
struct Box {
  std::vector<double> lo, hi;
};

Box frame_box(const KernelSpec& k, double centre_1d = 0.0, double width_1d = 0.0) {
  const int d = k.dim();
  Box b{std::vector<double>(d), std::vector<double>(d)};
  const Eigen::VectorXd lo = k.frame_lower(), hi = k.frame_upper();
  Eigen::VectorXd c = Eigen::VectorXd::Constant(d, centre_1d);
  double w = width_1d;
  if (k.quality().kind == QualityKind::gaussian) {
    c = k.to_frame(k.quality().center);
    w = 9.0 * std::sqrt(k.quality().cov.eigenvalues().real().maxCoeff());
  }
  for (int l = 0; l < d; ++l) {
    b.lo[l] = std::isfinite(lo[l]) ? lo[l] : c[l] - w;
    b.hi[l] = std::isfinite(hi[l]) ? hi[l] : c[l] + w;
  }
  return b;
}

struct Worst {
  double err = 0.0;
  int checks = 0;
  std::string where;

  void record(double e, const std::string& w) {
    ++checks;
    if (!(e <= err)) {
      err = e;
      where = w;
    }
  }
};

/// Nystrom map whose landmark Gram matrix has condition number <= 1e8,
/// lowering D when 50 draws at the requested rank all exceed it. Beyond that
/// W = L_Z^{-1/2} amplifies double roundoff in the closed form and in the
/// oracle integrand alike, and neither resolves 1e-6.
FeatureMap conditioned_nystrom(const KernelSpec& k, int D, RngStream& rng, int& redraws) {
  for (;; --D) {
    for (int attempt = 0; attempt < 50; ++attempt) {
      FeatureMap map = build_nystrom(k, D, rng);
      if (k.similarity().kind != SimilarityKind::gaussian) return map;
      const Eigen::VectorXd ev =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kernel_matrix(k, map.landmarks())).eigenvalues();
      if (ev.minCoeff() >= 1e-8 * ev.maxCoeff() || D == 1) return map;
      ++redraws;
    }
  }
}

/// Every entry of C against quadrature of B(x) B(x)^*, scaled by sqrt(C_jj C_kk).
void check_dual(const FeatureMap& map, const std::string& label, Worst& worst) {
  const Eigen::MatrixXcd c = dual_matrix(map);
  const int D = map.rank();
  const KernelSpec& k = map.kernel();
  const Box box = frame_box(k);
  const std::size_t m = static_cast<std::size_t>(D * D);
  // Real parts in the upper triangle (j <= k), imaginary parts below it.
  const std::vector<double> q = oracle::quad_oracle_vec(
      [&](const std::vector<double>& y, std::vector<double>& out) {
        const Eigen::VectorXcd b = map.eval_B(k.from_frame(Eigen::Map<const Eigen::VectorXd>(y.data(), y.size())));
        for (int j = 0; j < D; ++j)
          for (int l = j; l < D; ++l) {
            const cplx v = b[j] * std::conj(b[l]);
            out[j * D + l] = v.real();
            if (l != j) out[l * D + j] = v.imag();
          }
      },
      m, box.lo, box.hi, kQuad);
  for (int j = 0; j < D; ++j)
    for (int l = j; l < D; ++l) {
      const double scale = std::sqrt(q[j * D + j] * q[l * D + l]);
      worst.record(std::abs(c(j, l).real() - q[j * D + l]) / scale, label);
      if (l != j) worst.record(std::abs(c(j, l).imag() - q[l * D + j]) / scale, label);
    }
}

/// Compares cdf(axis, prefix, t) with quadrature of an unnormalized density f
/// (frame coordinates) at the quartiles of the closed-form conditional.
void check_cdf(const SeparableDensity& dens, const std::function<double(const Eigen::VectorXd&)>& f,
               const std::function<double(int, std::span<const double>, double)>& cdf, const Box& box,
               const std::string& label, Worst& worst) {
  const int d = dens.dim();
  auto integrand = [&](int axis, std::span<const double> prefix) {
    return [&, axis, prefix](const std::vector<double>& y, std::vector<double>& out) {
      Eigen::VectorXd full(d);
      for (int l = 0; l < axis; ++l) full[l] = prefix[l];
      for (int l = axis; l < d; ++l) full[l] = y[l - axis];
      out[0] = f(full);
    };
  };
  std::vector<double> prefix;
  for (int axis = 0; axis < d; ++axis) {
    const AxisConditional cond = dens.conditional(axis, prefix);
    std::vector<double> lo(box.lo.begin() + axis, box.lo.end()), hi(box.hi.begin() + axis, box.hi.end());
    const double z = oracle::quad_oracle_vec(integrand(axis, prefix), 1, lo, hi, kQuad)[0];
    for (double u : {0.1, 0.5, 0.9}) {
      const double t = cond.draw(u);
      std::vector<double> hi_t = hi;
      hi_t[0] = t;
      const double part = oracle::quad_oracle_vec(integrand(axis, prefix), 1, lo, hi_t, kQuad)[0] / z;
      worst.record(std::abs(cdf(axis, prefix, t) - part) / part, label + format(" axis %d", axis));
    }
    prefix.push_back(cond.draw(0.4));
  }
}

Verdict summarize(const std::vector<std::pair<const char*, Worst>>& groups, int configs) {
  bool pass = true;
  double overall = 0.0;
  int checks = 0;
  for (const auto& [name, w] : groups) {
    note("%-26s %4d checks, worst relative error %.2e (%s)", name, w.checks, w.err, w.where.c_str());
    pass = pass && w.err <= kTol && w.checks > 0;
    overall = std::max(overall, w.err);
    checks += w.checks;
  }
  return {pass, format("%d checks over %d configurations per form, worst relative error %.2e (tolerance %.0e)", checks,
                       configs, overall, kTol)};
}

}  // namespace

Verdict closed_form_checks(int configs, std::uint64_t seed) {
  RngStream rng(seed);
  Worst c_rff, c_nys_gg, c_nys_gl, f_rff, f_nys, f_gibbs, f_mix;
  int redraws = 0;

  for (int i = 0; i < configs; ++i) {
    const int d = 1 + i % 2;
    const bool bounded = i % 5 == 4;
    const std::string tag = format("config %d, d=%d%s", i, d, bounded ? ", box" : "");
    RngStream r = rng.split(i);
    {
      const KernelSpec k = random_kernel(d, Family::gauss_gauss, bounded, r);
      const int D = 2 + static_cast<int>(r.uniform() * 9);
      check_dual(build_rff(k, D, r), tag + format(", D=%d", D), c_rff);
      const FeatureMap nys = conditioned_nystrom(k, D, r, redraws);
      check_dual(nys, tag + format(", D=%d", nys.rank()), c_nys_gg);
    }
    {
      const KernelSpec k = random_kernel(d, Family::gauss_linear, bounded, r);
      const int D = 2 + static_cast<int>(r.uniform() * 9);
      check_dual(build_nystrom(k, D, r), tag + format(", D=%d", D), c_nys_gl);
    }
    for (MapKind kind : {MapKind::rff, MapKind::nystrom}) {
      const Family fam = kind == MapKind::nystrom && i % 3 == 2 ? Family::gauss_linear : Family::gauss_gauss;
      const KernelSpec k = random_kernel(d, fam, bounded, r);
      const int D = 2 + static_cast<int>(r.uniform() * 9);
      const FeatureMap map = kind == MapKind::rff ? build_rff(k, D, r) : conditioned_nystrom(k, D, r, redraws);
      const int rank = fam == Family::gauss_linear ? d : map.rank();
      const int n_sel = 1 + static_cast<int>(r.uniform() * std::min(rank, 3));
      const auto vs = phase1_kdpp(make_dual(map), n_sel, r);
      auto f = [&](const Eigen::VectorXd& y) {
        const Eigen::VectorXcd b = map.eval_B(k.from_frame(y));
        double s = 0.0;
        for (const auto& v : vs) s += std::norm(v.dot(b));
        return s;
      };
      auto cdf = [&](int axis, std::span<const double> prefix, double t) {
        return phase2_cdf(map, vs, axis, prefix, t);
      };
      check_cdf(map.phase2_density(vs), f, cdf, frame_box(k),
                tag + format(", %s, D=%d, |V|=%d", family_name(fam), map.rank(), n_sel), kind == MapKind::rff ? f_rff : f_nys);
    }
    {
      const Family fam = i % 4 == 3 ? Family::uniform_gauss : Family::gauss_gauss;
      const KernelSpec k = random_kernel(d, fam, bounded, r);
      const int n_others = 1 + static_cast<int>(r.uniform() * 4);
      // A state the chain actually visits, so the others are not near-coincident.
      const SampleSet others = run_gibbs_kdpp(k, n_others, 20L * n_others, 20L * n_others - 1, 1, r).back();
      const Eigen::MatrixXd minv = kernel_matrix(k, others).inverse();
      auto f = [&](const Eigen::VectorXd& y) {
        const Point x = k.from_frame(y);
        Eigen::VectorXd ell(n_others);
        for (int j = 0; j < n_others; ++j) ell[j] = eval_L(k, others[j], x);
        return eval_L(k, x, x) - ell.dot(minv * ell);
      };
      auto cdf = [&](int axis, std::span<const double> prefix, double t) {
        return full_conditional_cdf(k, others, axis, prefix, t);
      };
      check_cdf(full_conditional(k, others), f, cdf, frame_box(k),
                tag + format(", %s, %d others", family_name(fam), n_others), f_gibbs);
    }
    {
      MixtureModelSpec spec;
      spec.prior = PriorKind::dpp;
      spec.K = 2 + static_cast<int>(r.uniform() * 3);
      spec.sigma0_2 = r.uniform(0.5, 2.0);
      spec.gamma0_2 = r.uniform(0.3, 2.0);
      MixtureState s;
      const int n = 10;
      std::vector<double> y(n);
      for (int k = 0; k < spec.K; ++k) {
        s.pi.push_back(1.0 / spec.K);
        s.mu.push_back(r.normal());
        s.sigma2.push_back(r.uniform(0.3, 2.0));
      }
      for (int j = 0; j < n; ++j) {
        y[j] = r.normal(0.0, 1.5);
        s.z.push_back(static_cast<int>(r.uniform() * spec.K));
      }
      const int comp = static_cast<int>(r.uniform() * spec.K);
      const KernelSpec kern = mixture_prior_kernel(spec);
      SampleSet others;
      for (int k = 0; k < spec.K; ++k)
        if (k != comp) others.push_back(Eigen::VectorXd::Constant(1, s.mu[k]));
      const Eigen::MatrixXd minv = kernel_matrix(kern, others).inverse();
      int nk = 0;
      double sum = 0.0;
      for (int j = 0; j < n; ++j)
        if (s.z[j] == comp) {
          ++nk;
          sum += y[j];
        }
      auto f = [&](const Eigen::VectorXd& m) {
        Eigen::VectorXd ell(others.size());
        for (std::size_t j = 0; j < others.size(); ++j) ell[j] = eval_L(kern, others[j], m);
        const double tilt = nk ? -nk * std::pow(m[0] - sum / nk, 2) / (2.0 * s.sigma2[comp]) : 0.0;
        return (eval_L(kern, m, m) - ell.dot(minv * ell)) * std::exp(tilt);
      };
      const SeparableDensity dens = dpp_mean_conditional(spec, s, y, comp);
      auto cdf = [&](int axis, std::span<const double> prefix, double t) {
        return dens.conditional(axis, prefix).cdf(t);
      };
      const double w = 10.0 * std::sqrt(spec.sigma0_2);
      check_cdf(dens, f, cdf, Box{{-w}, {w}}, format("config %d, K=%d, n_k=%d", i, spec.K, nk), f_mix);
    }
  }
  note("gaussian landmark sets redrawn for a Gram condition number above 1e8: %d", redraws);
  return summarize({{"C RFF", c_rff},
                    {"C Nystrom gauss-gauss", c_nys_gg},
                    {"C Nystrom gauss-linear", c_nys_gl},
                    {"F RFF", f_rff},
                    {"F Nystrom", f_nys},
                    {"Gibbs conditional CDF", f_gibbs},
                    {"mixture mean CDF", f_mix}},
                   configs);
}

Verdict closed_forms() { return closed_form_checks(50, 1001); }

Verdict esp_oracle() {
  RngStream rng(1002);
  double worst = 0.0;
  int checks = 0;
  for (int D = 1; D <= 12; ++D)
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> lambda(D);
      const double ratio = rng.uniform(0.05, 0.9);
      for (int n = 0; n < D; ++n) {
        switch (trial % 4) {
          case 0: lambda[n] = rng.uniform(); break;
          case 1: lambda[n] = std::pow(10.0, rng.uniform(-3.0, 3.0)); break;
          case 2: lambda[n] = std::pow(10.0, rng.uniform(-8.0, 8.0)); break;
          default: lambda[n] = 50.0 * std::pow(ratio, n); break;
        }
      }
      const ESPTable t = esp_table(lambda, D);
      for (int n = 0; n <= D; ++n) {
        std::vector<long double> brute(n + 1, 0.0L);
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
          long double p = 1.0L;
          int size = 0;
          for (int j = 0; j < n; ++j)
            if (mask >> j & 1u) {
              p *= lambda[j];
              ++size;
            }
          brute[size] += p;
        }
        for (int k = 0; k <= D; ++k) {
          const double v = t.value(k, n);
          const double err = k > n ? std::abs(v) : static_cast<double>(std::abs((v - brute[k]) / brute[k]));
          worst = std::max(worst, err);
          ++checks;
        }
      }
    }
  note("%d entries e_k^n, D <= 12, eigenvalues spanning up to 16 decades", checks);
  return {worst <= 1e-12, format("worst relative error %.2e over %d entries (tolerance 1e-12)", worst, checks)};
}

}  // namespace acceptance
