#include "cdpp/schur_gibbs.hpp"

#include <cmath>
#include <string>

#include "cdpp/error.hpp"
#include "cdpp/linalg.hpp"
#include "cdpp/parallel.hpp"

namespace cdpp {

Eigen::MatrixXd schur_inverse(const Eigen::MatrixXd& l) {
  const Eigen::Index n = l.rows();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (l + l.transpose()));
  if (eig.info() != Eigen::Success) throw NumericError("schur_inverse: eigensolver failed");
  Eigen::VectorXd ev = eig.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0.0)) throw NumericError("schur_inverse: kernel matrix is zero");
  const double low = ev.minCoeff();
  if (!(low > 0.0) || top / low > 1e12) ev.array() += 1e-10 * top;
  if (!(ev.minCoeff() > 0.0)) throw NumericError("schur_inverse: kernel matrix is not positive semidefinite");
  return eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

SeparableDensity full_conditional(const KernelSpec& kernel, const SampleSet& others) {
  const Eigen::MatrixXd m = schur_inverse(kernel_matrix(kernel, others));
  return quadratic_density(kernel, others, -m, 1.0);
}

double full_conditional_cdf(const KernelSpec& kernel, const SampleSet& others, int axis, std::span<const double> prefix,
                            double t) {
  return full_conditional(kernel, others).conditional(axis, prefix).cdf(t);
}

double schur_identity_residual(const KernelSpec& kernel, const SampleSet& points, int index) {
  SampleSet others;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (static_cast<int>(i) != index) others.push_back(points[i]);
  const double full = kernel_matrix(kernel, points).determinant();
  const double rest = others.empty() ? 1.0 : kernel_matrix(kernel, others).determinant();
  const Point& x = points[index];
  const double cond = others.empty() ? kernel.eval(x, x) : full_conditional(kernel, others).eval(kernel.to_frame(x));
  return std::abs(full - rest * cond) / std::abs(full);
}

SampleSet gibbs_init(const KernelSpec& kernel, int k, RngStream& rng) {
  SampleSet out;
  out.reserve(k);
  const Domain& dom = kernel.domain();
  const int d = kernel.dim();
  for (int i = 0; i < k; ++i) {
    if (kernel.quality().kind == QualityKind::uniform) {
      Point x(d);
      for (int l = 0; l < d; ++l) x[l] = rng.uniform(dom.lo[l], dom.hi[l]);
      out.push_back(std::move(x));
      continue;
    }
    int tries = 0;
    while (true) {
      Point x = rng.mvn(kernel.quality().center, 0.5 * kernel.quality().cov);
      if (dom.contains(x)) {
        out.push_back(std::move(x));
        break;
      }
      if (++tries > 100000) throw NumericError("gibbs_init: domain has negligible quality mass");
    }
  }
  return out;
}

void gibbs_update(const KernelSpec& kernel, SampleSet& points, int index, RngStream& rng) {
  SampleSet others;
  others.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    if (static_cast<int>(i) != index) others.push_back(points[i]);
  const SeparableDensity dens = full_conditional(kernel, others);
  const Eigen::VectorXd y = dens.sample(rng);
  const double f = dens.eval(y);
  const Point x = kernel.from_frame(y);
  const double scale = std::max(kernel.eval(x, x), 1e-300);
  if (f < -1e-8 * scale) throw NumericError("gibbs: negative conditional density " + std::to_string(f));
  points[index] = x;
}

void gibbs_sweep(const KernelSpec& kernel, SampleSet& points, RngStream& rng) {
  for (int i = 0; i < static_cast<int>(points.size()); ++i) gibbs_update(kernel, points, i, rng);
}

std::vector<SampleSet> run_gibbs_kdpp(const KernelSpec& kernel, int k, long n_iterations, long burn_in, long thin,
                                      RngStream& rng) {
  if (k < 1) throw ConfigError("gibbs: k must be positive");
  if (n_iterations < 0 || burn_in < 0) throw ConfigError("gibbs: iteration counts must be nonnegative");
  if (thin < 1) throw ConfigError("gibbs: thin must be at least 1");
  if (!kernel.separable()) throw ConfigError("gibbs: kernel does not factor along axes");
  SampleSet state = gibbs_init(kernel, k, rng);
  std::vector<SampleSet> chain;
  if (n_iterations > burn_in) chain.reserve(static_cast<std::size_t>((n_iterations - burn_in) / thin));
  for (long t = 1; t <= n_iterations; ++t) {
    gibbs_update(kernel, state, static_cast<int>((t - 1) % k), rng);
    if (t > burn_in && (t - burn_in) % thin == 0) chain.push_back(state);
  }
  return chain;
}

std::vector<std::vector<SampleSet>> run_gibbs_chains(const KernelSpec& kernel, int k, int n_chains, long n_iterations,
                                                     long burn_in, long thin, RngStream& rng, Exec exec) {
  if (n_chains < 1) throw ConfigError("gibbs: need at least one chain");
  std::vector<std::vector<SampleSet>> out(n_chains);
  parallel_for(static_cast<std::size_t>(n_chains), exec, [&](std::size_t c) {
    RngStream r = rng.split(c);
    out[c] = run_gibbs_kdpp(kernel, k, n_iterations, burn_in, thin, r);
  });
  return out;
}

}  // namespace cdpp
