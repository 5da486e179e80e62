#include "cdpp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cdpp/error.hpp"
#include "cdpp/linalg.hpp"
#include "cdpp/numerics.hpp"

namespace cdpp {

namespace {

using nlohmann::json;

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw ConfigError(std::string(what) + ": covariance is not square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw ConfigError(std::string(what) + ": covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw ConfigError(std::string(what) + ": covariance is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

bool is_diagonal(const Eigen::MatrixXd& m) {
  return (m - Eigen::MatrixXd(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
}

const char* quality_name(QualityKind k) { return k == QualityKind::gaussian ? "gaussian" : "uniform"; }

const char* similarity_name(SimilarityKind k) {
  switch (k) {
    case SimilarityKind::gaussian: return "gaussian";
    case SimilarityKind::laplacian: return "laplacian";
    case SimilarityKind::cauchy: return "cauchy";
    case SimilarityKind::linear: return "linear";
    case SimilarityKind::polynomial: return "polynomial";
  }
  return "?";
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json r = json::array();
  for (double x : v) r.push_back(x);
  return r;
}

Eigen::VectorXd parse_vector(const json& j, int d, const char* what) {
  Eigen::VectorXd v(d);
  if (j.is_number()) {
    v.setConstant(j.get<double>());
    return v;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw ConfigError(std::string(what) + ": expected a number or an array of length " + std::to_string(d));
  for (int i = 0; i < d; ++i) v[i] = j[i].get<double>();
  return v;
}

// Scalar => isotropic, flat array => diagonal, nested array => full.
Eigen::MatrixXd parse_cov(const json& j, int d, const char* what) {
  if (j.is_number()) return j.get<double>() * Eigen::MatrixXd::Identity(d, d);
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw ConfigError(std::string(what) + ": expected a number, a length-d array or a d x d array");
  if (j[0].is_number()) return parse_vector(j, d, what).asDiagonal();
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != d) throw ConfigError(std::string(what) + ": ragged matrix");
    for (int k = 0; k < d; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

}  // namespace

bool Domain::contains(const Point& x) const {
  if (!bounded) return true;
  for (Eigen::Index l = 0; l < x.size(); ++l)
    if (x[l] < lo[l] || x[l] > hi[l]) return false;
  return true;
}

KernelSpec::KernelSpec(QualitySpec quality, SimilaritySpec similarity, Domain domain)
    : quality_(std::move(quality)), similarity_(std::move(similarity)), domain_(std::move(domain)) {
  if (quality_.center.size() > 0) {
    dim_ = static_cast<int>(quality_.center.size());
  } else if (domain_.bounded) {
    dim_ = static_cast<int>(domain_.lo.size());
  } else {
    throw ConfigError("kernel: dimension cannot be inferred");
  }
  if (dim_ < 1) throw ConfigError("kernel: dimension must be positive");
  if (domain_.bounded) {
    if (domain_.lo.size() != dim_ || domain_.hi.size() != dim_) throw ConfigError("kernel: domain dimension mismatch");
    for (int l = 0; l < dim_; ++l)
      if (!(domain_.lo[l] < domain_.hi[l])) throw ConfigError("kernel: empty domain box");
  }

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim_, dim_);
  std::vector<Eigen::MatrixXd> mats;
  if (quality_.kind == QualityKind::gaussian) {
    if (quality_.center.size() != dim_) throw ConfigError("quality: center dimension mismatch");
    if (quality_.cov.rows() != dim_) throw ConfigError("quality: covariance dimension mismatch");
    gamma_inv_ = spd_inverse(quality_.cov, "quality");
    mats.push_back(gamma_inv_);
  } else {
    if (!domain_.bounded) throw ConfigError("uniform quality requires a bounded domain");
    if (quality_.center.size() == 0) quality_.center = 0.5 * (domain_.lo + domain_.hi);
  }

  switch (similarity_.kind) {
    case SimilarityKind::gaussian:
      if (similarity_.cov.rows() != dim_) throw ConfigError("similarity: covariance dimension mismatch");
      sigma_inv_ = spd_inverse(similarity_.cov, "similarity");
      break;
    case SimilarityKind::laplacian:
    case SimilarityKind::cauchy:
      if (!(similarity_.scale > 0.0)) throw ConfigError("similarity: scale must be positive");
      break;
    case SimilarityKind::linear:
      similarity_.degree = 1;
      similarity_.offset = 0.0;
      break;
    case SimilarityKind::polynomial:
      if (similarity_.degree < 1) throw ConfigError("similarity: polynomial degree must be at least 1");
      if (similarity_.offset < 0.0) throw ConfigError("similarity: polynomial offset must be nonnegative");
      break;
  }

  frame_ = id;
  bool joint = true;
  if (similarity_.kind == SimilarityKind::gaussian) {
    std::vector<Eigen::MatrixXd> both = mats;
    both.push_back(sigma_inv_);
    Eigen::MatrixXd t;
    if (common_eigenbasis(both, t)) {
      frame_ = t;
    } else {
      joint = false;
      if (!mats.empty() && common_eigenbasis(mats, t)) frame_ = t;
    }
  } else if (!mats.empty()) {
    Eigen::MatrixXd t;
    common_eigenbasis(mats, t);
    frame_ = t;
  }
  frame_identity_ = (frame_ - id).cwiseAbs().maxCoeff() == 0.0;
  if (domain_.bounded && !frame_identity_) {
    if (quality_.kind == QualityKind::gaussian && !is_diagonal(quality_.cov))
      throw ConfigError("box domains require an axis-aligned quality covariance");
    frame_ = id;
    frame_identity_ = true;
    joint = false;
  }
  separable_ = (similarity_.kind == SimilarityKind::gaussian && joint) ||
               similarity_.kind == SimilarityKind::linear || similarity_.kind == SimilarityKind::polynomial;

  q_center_f_ = frame_.transpose() * quality_.center;
  q_prec_f_ = Eigen::VectorXd::Zero(dim_);
  s_prec_f_ = Eigen::VectorXd::Zero(dim_);
  if (quality_.kind == QualityKind::gaussian) q_prec_f_ = (frame_.transpose() * gamma_inv_ * frame_).diagonal();
  if (similarity_.kind == SimilarityKind::gaussian) s_prec_f_ = (frame_.transpose() * sigma_inv_ * frame_).diagonal();
}

bool KernelSpec::translation_invariant() const {
  return similarity_.kind == SimilarityKind::gaussian || similarity_.kind == SimilarityKind::laplacian ||
         similarity_.kind == SimilarityKind::cauchy;
}

double KernelSpec::quality_value(const Point& x) const {
  if (x.size() != dim_) throw ConfigError("quality: point dimension mismatch");
  if (quality_.kind == QualityKind::uniform) return domain_.contains(x) ? 1.0 : 0.0;
  const Eigen::VectorXd d = x - quality_.center;
  return std::exp(-0.5 * d.dot(gamma_inv_ * d));
}

double KernelSpec::similarity_value(const Point& x, const Point& y) const {
  if (x.size() != dim_ || y.size() != dim_) throw ConfigError("similarity: point dimension mismatch");
  switch (similarity_.kind) {
    case SimilarityKind::gaussian: {
      const Eigen::VectorXd d = x - y;
      return std::exp(-0.5 * d.dot(sigma_inv_ * d));
    }
    case SimilarityKind::laplacian:
      return std::exp(-(x - y).cwiseAbs().sum() / similarity_.scale);
    case SimilarityKind::cauchy: {
      double r = 1.0;
      for (int l = 0; l < dim_; ++l) {
        const double u = (x[l] - y[l]) / similarity_.scale;
        r /= 1.0 + u * u;
      }
      return r;
    }
    case SimilarityKind::linear:
    case SimilarityKind::polynomial:
      return std::pow(x.dot(y) + similarity_.offset, similarity_.degree);
  }
  return 0.0;
}

double KernelSpec::eval(const Point& x, const Point& y) const {
  return quality_value(x) * similarity_value(x, y) * quality_value(y);
}

Eigen::VectorXd KernelSpec::to_frame(const Point& x) const {
  return frame_identity_ ? Eigen::VectorXd(x) : Eigen::VectorXd(frame_.transpose() * x);
}

Point KernelSpec::from_frame(const Eigen::VectorXd& y) const {
  return frame_identity_ ? Point(y) : Point(frame_ * y);
}

Eigen::VectorXd KernelSpec::frame_lower() const {
  return domain_.bounded ? domain_.lo : Eigen::VectorXd::Constant(dim_, -kInf);
}

Eigen::VectorXd KernelSpec::frame_upper() const {
  return domain_.bounded ? domain_.hi : Eigen::VectorXd::Constant(dim_, kInf);
}

std::vector<AxisFactor> KernelSpec::quality_factors() const {
  std::vector<AxisFactor> f(dim_);
  if (quality_.kind == QualityKind::gaussian) {
    for (int l = 0; l < dim_; ++l) {
      f[l].precision = 0.5 * q_prec_f_[l];
      f[l].center = q_center_f_[l];
    }
  }
  return f;
}

KernelSlice KernelSpec::slice(const Point& z) const {
  if (!separable_) throw ConfigError("kernel does not factor along axes for this quality/similarity pair");
  KernelSlice s;
  const double qz = quality_value(z);
  s.log_scale = qz > 0.0 ? std::log(qz) : -kInf;
  s.factors = quality_factors();
  const Eigen::VectorXd yz = to_frame(z);
  if (similarity_.kind == SimilarityKind::gaussian) {
    for (int l = 0; l < dim_; ++l) {
      AxisFactor k;
      k.precision = 0.5 * s_prec_f_[l];
      k.center = yz[l];
      double lc = 0.0;
      s.factors[l] = multiply(s.factors[l], k, lc);
      s.log_scale += lc;
    }
    s.poly = poly_constant(dim_, 1.0);
  } else {
    s.poly = poly_pow(poly_linear(yz, similarity_.offset), similarity_.degree);
  }
  return s;
}

KernelSlice KernelSpec::diagonal() const {
  if (!separable_) throw ConfigError("kernel does not factor along axes for this quality/similarity pair");
  KernelSlice s;
  s.factors = quality_factors();
  for (auto& f : s.factors) f.precision *= 2.0;
  if (similarity_.kind == SimilarityKind::gaussian) {
    s.poly = poly_constant(dim_, 1.0);
  } else {
    Poly sq = poly_constant(dim_, similarity_.offset);
    for (int l = 0; l < dim_; ++l) {
      std::vector<int> e(dim_, 0);
      e[l] = 2;
      sq[e] = 1.0;
    }
    s.poly = poly_pow(sq, similarity_.degree);
  }
  return s;
}

json KernelSpec::to_json() const {
  json j;
  j["dim"] = dim_;
  if (domain_.bounded) {
    json box = json::array();
    for (int l = 0; l < dim_; ++l) box.push_back({domain_.lo[l], domain_.hi[l]});
    j["domain"] = box;
  } else {
    j["domain"] = "full";
  }
  j["quality.kind"] = quality_name(quality_.kind);
  if (quality_.kind == QualityKind::gaussian) {
    j["quality.center"] = vector_json(quality_.center);
    j["quality.cov"] = matrix_json(quality_.cov);
  }
  j["similarity.kind"] = similarity_name(similarity_.kind);
  json p = json::object();
  switch (similarity_.kind) {
    case SimilarityKind::gaussian: p["cov"] = matrix_json(similarity_.cov); break;
    case SimilarityKind::laplacian:
    case SimilarityKind::cauchy: p["scale"] = similarity_.scale; break;
    case SimilarityKind::polynomial:
      p["degree"] = similarity_.degree;
      p["offset"] = similarity_.offset;
      break;
    case SimilarityKind::linear: break;
  }
  j["similarity.params"] = p;
  return j;
}

KernelSpec KernelSpec::from_json(const json& j) {
  try {
    if (!j.contains("dim")) throw ConfigError("kernel json: missing key 'dim'");
    const int d = j.at("dim").get<int>();
    if (d < 1) throw ConfigError("kernel json: dim must be positive");
    Domain dom;
    if (j.contains("domain") && !(j["domain"].is_string() && j["domain"].get<std::string>() == "full")) {
      const json& box = j["domain"];
      if (!box.is_array() || static_cast<int>(box.size()) != d) throw ConfigError("kernel json: domain must be 'full' or d [lo, hi] pairs");
      dom.bounded = true;
      dom.lo.resize(d);
      dom.hi.resize(d);
      for (int l = 0; l < d; ++l) {
        dom.lo[l] = box[l].at(0).get<double>();
        dom.hi[l] = box[l].at(1).get<double>();
      }
    }
    QualitySpec q;
    const std::string qk = j.value("quality.kind", std::string("gaussian"));
    if (qk == "gaussian") {
      q.kind = QualityKind::gaussian;
      q.center = parse_vector(j.at("quality.center"), d, "quality.center");
      q.cov = parse_cov(j.at("quality.cov"), d, "quality.cov");
    } else if (qk == "uniform") {
      q.kind = QualityKind::uniform;
    } else {
      throw ConfigError("kernel json: unknown quality.kind '" + qk + "'");
    }
    SimilaritySpec s;
    const std::string sk = j.at("similarity.kind").get<std::string>();
    const json params = j.value("similarity.params", json::object());
    if (sk == "gaussian") {
      s.kind = SimilarityKind::gaussian;
      s.cov = parse_cov(params.at("cov"), d, "similarity.params.cov");
    } else if (sk == "laplacian" || sk == "cauchy") {
      s.kind = sk == "laplacian" ? SimilarityKind::laplacian : SimilarityKind::cauchy;
      s.scale = params.value("scale", 1.0);
    } else if (sk == "linear") {
      s.kind = SimilarityKind::linear;
    } else if (sk == "polynomial") {
      s.kind = SimilarityKind::polynomial;
      s.degree = params.value("degree", 2);
      s.offset = params.value("offset", 1.0);
    } else {
      throw ConfigError("kernel json: unknown similarity.kind '" + sk + "'");
    }
    if (q.kind == QualityKind::uniform && !dom.bounded) throw ConfigError("uniform quality requires a bounded domain");
    if (q.kind == QualityKind::uniform) q.center = 0.5 * (dom.lo + dom.hi);
    return KernelSpec(std::move(q), std::move(s), std::move(dom));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("kernel json: ") + e.what());
  }
}

double eval_L(const KernelSpec& spec, const Point& x, const Point& y) { return spec.eval(x, y); }
double eval_quality(const KernelSpec& spec, const Point& x) { return spec.quality_value(x); }
double eval_similarity(const KernelSpec& spec, const Point& x, const Point& y) { return spec.similarity_value(x, y); }

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const SampleSet& xs, Exec exec) {
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd m(n, n);
  parallel_for(xs.size(), exec, [&](std::size_t r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (Eigen::Index j = 0; j <= i; ++j) {
      m(i, j) = spec.eval(xs[i], xs[j]);
      m(j, i) = m(i, j);
    }
  });
  return m;
}

KernelSpec gaussian_kernel(int d, double rho2, double sigma2) {
  QualitySpec q{QualityKind::gaussian, Eigen::VectorXd::Zero(d), rho2 * Eigen::MatrixXd::Identity(d, d)};
  SimilaritySpec s;
  s.kind = SimilarityKind::gaussian;
  s.cov = sigma2 * Eigen::MatrixXd::Identity(d, d);
  return KernelSpec(q, s, Domain{});
}

namespace {

void append_expanded(const std::vector<AxisFactor>& base, double log_scale, const Poly& poly, std::vector<SepTerm>& out) {
  if (!(log_scale > -kInf)) return;
  const double scale = std::exp(log_scale);
  for (const auto& [e, c] : poly) {
    if (c == 0.0) continue;
    SepTerm t;
    t.coef = c * scale;
    t.factors = base;
    for (std::size_t l = 0; l < e.size(); ++l) t.factors[l].power += e[l];
    out.push_back(std::move(t));
  }
}

}  // namespace

std::vector<SepTerm> slice_product(const KernelSlice& a, const KernelSlice& b) {
  std::vector<AxisFactor> f(a.factors.size());
  double ls = a.log_scale + b.log_scale;
  for (std::size_t l = 0; l < f.size(); ++l) {
    double lc = 0.0;
    f[l] = multiply(a.factors[l], b.factors[l], lc);
    ls += lc;
  }
  std::vector<SepTerm> out;
  append_expanded(f, ls, poly_mul(a.poly, b.poly), out);
  return out;
}

std::vector<SepTerm> slice_terms(const KernelSlice& a) {
  std::vector<SepTerm> out;
  append_expanded(a.factors, a.log_scale, a.poly, out);
  return out;
}

SeparableDensity quadratic_density(const KernelSpec& spec, const SampleSet& zs, const Eigen::MatrixXd& q,
                                   double diag_coef) {
  const std::size_t n = zs.size();
  if (q.rows() != static_cast<Eigen::Index>(n) || q.cols() != static_cast<Eigen::Index>(n))
    throw ConfigError("quadratic_density: coefficient matrix size mismatch");
  SeparableDensity dens(spec.frame_lower(), spec.frame_upper());
  std::vector<KernelSlice> sl;
  sl.reserve(n);
  for (const auto& z : zs) sl.push_back(spec.slice(z));
  const KernelSlice diag = spec.diagonal();

  if (spec.similarity().kind != SimilarityKind::gaussian) {
    // Every slice shares the quality factor, so the whole form collapses to
    // q(x)^2 times one polynomial.
    Poly total;
    if (diag_coef != 0.0) poly_axpy(diag_coef, diag.poly, total);
    for (std::size_t m = 0; m < n; ++m) {
      if (!(sl[m].log_scale > -kInf)) continue;
      Poly row;
      for (std::size_t k = 0; k < n; ++k) {
        if (q(m, k) == 0.0 || !(sl[k].log_scale > -kInf)) continue;
        poly_axpy(q(m, k) * std::exp(sl[k].log_scale), sl[k].poly, row);
      }
      poly_axpy(std::exp(sl[m].log_scale), poly_mul(sl[m].poly, row), total);
    }
    std::vector<SepTerm> terms;
    append_expanded(diag.factors, 0.0, total, terms);
    for (auto& t : terms) dens.add(std::move(t));
    return dens;
  }

  if (diag_coef != 0.0) {
    for (auto& t : slice_terms(diag)) {
      t.coef *= diag_coef;
      dens.add(std::move(t));
    }
  }
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = m; k < n; ++k) {
      const double c = (m == k) ? q(m, k) : q(m, k) + q(k, m);
      if (c == 0.0) continue;
      for (auto& t : slice_product(sl[m], sl[k])) {
        t.coef *= c;
        dens.add(std::move(t));
      }
    }
  }
  return dens;
}

Eigen::MatrixXd slice_gram(const KernelSpec& spec, const SampleSet& zs) {
  const Eigen::Index n = static_cast<Eigen::Index>(zs.size());
  std::vector<KernelSlice> sl;
  sl.reserve(zs.size());
  for (const auto& z : zs) sl.push_back(spec.slice(z));
  const Eigen::VectorXd lo = spec.frame_lower(), hi = spec.frame_upper();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = m; k < n; ++k) {
      double acc = 0.0;
      for (const auto& t : slice_product(sl[m], sl[k])) {
        cplx v = t.coef;
        for (int l = 0; l < spec.dim(); ++l) v *= axis_integral(t.factors[l], lo[l], hi[l]);
        acc += v.real();
      }
      a(m, k) = a(k, m) = acc;
    }
  }
  return a;
}

GaussianSpectrum1d gaussian_spectrum_1d(double rho2, double sigma2) {
  if (!(rho2 > 0.0) || !(sigma2 > 0.0)) throw ConfigError("gaussian eigenvalues: variances must be positive");
  const double beta2 = std::sqrt(1.0 + 2.0 * rho2 / sigma2);
  const double c1 = beta2 + 1.0;
  const double c2 = rho2 / sigma2;
  return {std::sqrt(std::numbers::pi * rho2 / (0.5 * (c1 + c2))), 1.0 / (c1 / c2 + 1.0)};
}

std::vector<MultiIndexEigenvalue> gaussian_eigenvalues(double rho2, double sigma2, int d, int count_per_dim) {
  if (d < 1 || count_per_dim < 1) throw ConfigError("gaussian eigenvalues: d and count must be positive");
  const GaussianSpectrum1d s = gaussian_spectrum_1d(rho2, sigma2);
  std::vector<double> one(count_per_dim);
  for (int n = 0; n < count_per_dim; ++n) one[n] = s.top * std::pow(s.ratio, n);
  std::vector<MultiIndexEigenvalue> out;
  std::vector<int> idx(d, 0);
  while (true) {
    MultiIndexEigenvalue e;
    e.value = 1.0;
    e.index.resize(d);
    for (int l = 0; l < d; ++l) {
      e.value *= one[idx[l]];
      e.index[l] = idx[l] + 1;
    }
    out.push_back(std::move(e));
    int l = d - 1;
    while (l >= 0 && ++idx[l] == count_per_dim) idx[l--] = 0;
    if (l < 0) break;
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
  return out;
}

std::vector<EigenGroup> gaussian_eigen_groups(double rho2, double sigma2, int d, double rel_cut) {
  const GaussianSpectrum1d s = gaussian_spectrum_1d(rho2, sigma2);
  const double top = std::pow(s.top, d);
  std::vector<EigenGroup> out;
  for (int m = 0;; ++m) {
    const double v = top * std::pow(s.ratio, m);
    if (v < rel_cut * top) break;
    // C(m+d-1, d-1)
    double mult = 1.0;
    for (int i = 1; i < d; ++i) mult = mult * (m + i) / i;
    out.push_back({v, mult});
  }
  return out;
}

}  // namespace cdpp
