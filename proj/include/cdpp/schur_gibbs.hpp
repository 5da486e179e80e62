#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdpp/kernel.hpp"
#include "cdpp/parallel.hpp"
#include "cdpp/rng.hpp"
#include "cdpp/separable.hpp"
#include "cdpp/types.hpp"

namespace cdpp {

/// Inverse of a kernel matrix, with 1e-10 jitter (relative to its largest
/// eigenvalue) when the condition number exceeds 1e12.
Eigen::MatrixXd schur_inverse(const Eigen::MatrixXd& l);

/// Unnormalized density of x given the other points, in frame coordinates:
/// L(x,x) - sum_ij M_ij L(x_i,x) L(x_j,x), M the inverse over the others.
SeparableDensity full_conditional(const KernelSpec& kernel, const SampleSet& others);

double full_conditional_cdf(const KernelSpec& kernel, const SampleSet& others, int axis, std::span<const double> prefix,
                            double t);

/// |det L_X - det L_{X without i} * f_i(x_i)| / |det L_X|.
double schur_identity_residual(const KernelSpec& kernel, const SampleSet& points, int index);

/// k i.i.d. draws with density proportional to q^2 on the domain.
SampleSet gibbs_init(const KernelSpec& kernel, int k, RngStream& rng);

/// Redraws point `index` from its full conditional.
void gibbs_update(const KernelSpec& kernel, SampleSet& points, int index, RngStream& rng);

/// One systematic scan over all points (a cycle).
void gibbs_sweep(const KernelSpec& kernel, SampleSet& points, RngStream& rng);

/// Runs n_iterations single-point updates in systematic scan order, starting
/// from gibbs_init. The state after iteration t is recorded when t > burn_in
/// and (t - burn_in) is a multiple of thin.
std::vector<SampleSet> run_gibbs_kdpp(const KernelSpec& kernel, int k, long n_iterations, long burn_in, long thin,
                                      RngStream& rng);

/// Independent chains; chain c uses rng.split(c).
std::vector<std::vector<SampleSet>> run_gibbs_chains(const KernelSpec& kernel, int k, int n_chains, long n_iterations,
                                                     long burn_in, long thin, RngStream& rng, Exec exec = Exec::serial);

}  // namespace cdpp
