#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cdpp/parallel.hpp"
#include "cdpp/separable.hpp"
#include "cdpp/types.hpp"

namespace cdpp {

enum class QualityKind { gaussian, uniform };
enum class SimilarityKind { gaussian, laplacian, cauchy, linear, polynomial };

/// q(x) = exp(-1/2 (x-a)^T Gamma^{-1} (x-a)), or q = 1 on a bounded domain.
struct QualitySpec {
  QualityKind kind = QualityKind::gaussian;
  Eigen::VectorXd center;
  Eigen::MatrixXd cov;
};

struct SimilaritySpec {
  SimilarityKind kind = SimilarityKind::gaussian;
  Eigen::MatrixXd cov;  // gaussian
  double scale = 1.0;   // laplacian, cauchy
  int degree = 1;       // polynomial
  double offset = 0.0;  // polynomial
};

/// Whole R^d when `bounded` is false, otherwise the box [lo, hi].
struct Domain {
  bool bounded = false;
  Eigen::VectorXd lo, hi;

  bool contains(const Point& x) const;
};

/// L(z, x) viewed as a function of frame coordinates y = T^T x:
/// exp(log_scale) * prod_l factors[l](y_l) * poly(y).
struct KernelSlice {
  double log_scale = 0.0;
  std::vector<AxisFactor> factors;
  Poly poly;
};

class KernelSpec {
 public:
  KernelSpec(QualitySpec quality, SimilaritySpec similarity, Domain domain);

  int dim() const { return dim_; }
  const QualitySpec& quality() const { return quality_; }
  const SimilaritySpec& similarity() const { return similarity_; }
  const Domain& domain() const { return domain_; }

  bool translation_invariant() const;

  double quality_value(const Point& x) const;
  double similarity_value(const Point& x, const Point& y) const;
  double eval(const Point& x, const Point& y) const;

  /// Orthogonal frame T (x = T y) in which q, and k when possible, factor by axis.
  const Eigen::MatrixXd& frame() const { return frame_; }
  bool frame_is_identity() const { return frame_identity_; }
  Eigen::VectorXd to_frame(const Point& x) const;
  Point from_frame(const Eigen::VectorXd& y) const;
  Eigen::VectorXd frame_lower() const;
  Eigen::VectorXd frame_upper() const;

  /// True when L(z, .) is a finite sum of axis-separable terms in the frame.
  bool separable() const { return separable_; }
  /// q(x) per frame axis.
  std::vector<AxisFactor> quality_factors() const;
  KernelSlice slice(const Point& z) const;
  /// L(x, x) as a function of x.
  KernelSlice diagonal() const;

  nlohmann::json to_json() const;
  static KernelSpec from_json(const nlohmann::json& j);

 private:
  int dim_;
  QualitySpec quality_;
  SimilaritySpec similarity_;
  Domain domain_;
  Eigen::MatrixXd gamma_inv_, sigma_inv_;
  Eigen::MatrixXd frame_;
  bool frame_identity_ = true;
  bool separable_ = false;
  Eigen::VectorXd q_center_f_, q_prec_f_, s_prec_f_;
};

double eval_L(const KernelSpec& spec, const Point& x, const Point& y);
double eval_quality(const KernelSpec& spec, const Point& x);
double eval_similarity(const KernelSpec& spec, const Point& x, const Point& y);
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const SampleSet& xs, Exec exec = Exec::serial);

/// Convenience constructors for the isotropic gaussian/gaussian family.
KernelSpec gaussian_kernel(int d, double rho2, double sigma2);

/// Separable terms of the product of two slices.
std::vector<SepTerm> slice_product(const KernelSlice& a, const KernelSlice& b);
/// Terms of a slice on its own (its polynomial expanded into monomials).
std::vector<SepTerm> slice_terms(const KernelSlice& a);

/// f(x) = diag_coef * L(x,x) + sum_{mn} Q_mn L(z_m,x) L(z_n,x), Q symmetric,
/// as a density over frame coordinates.
SeparableDensity quadratic_density(const KernelSpec& spec, const SampleSet& zs, const Eigen::MatrixXd& q,
                                   double diag_coef);

/// A_mn = integral of L(z_m, x) L(z_n, x) over the domain.
Eigen::MatrixXd slice_gram(const KernelSpec& spec, const SampleSet& zs);

struct MultiIndexEigenvalue {
  std::vector<int> index;  // 1-based per dimension
  double value;
};

/// Leading eigenvalue and geometric ratio of the one-dimensional operator with
/// Gamma = rho2, Sigma = sigma2.
struct GaussianSpectrum1d {
  double top;
  double ratio;
};
GaussianSpectrum1d gaussian_spectrum_1d(double rho2, double sigma2);

/// All lambda_n for n in {1..count_per_dim}^d, descending.
std::vector<MultiIndexEigenvalue> gaussian_eigenvalues(double rho2, double sigma2, int d, int count_per_dim);

/// Distinct eigenvalues top^d * ratio^m with multiplicity C(m+d-1, d-1),
/// for m until the value drops below rel_cut * top^d.
struct EigenGroup {
  double value;
  double multiplicity;
};
std::vector<EigenGroup> gaussian_eigen_groups(double rho2, double sigma2, int d, double rel_cut = 1e-12);

}  // namespace cdpp
