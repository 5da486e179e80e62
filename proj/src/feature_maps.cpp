#include "cdpp/feature_maps.hpp"

#include <cmath>
#include <string>

#include "cdpp/error.hpp"
#include "cdpp/linalg.hpp"

namespace cdpp {

const char* map_kind_name(MapKind k) { return k == MapKind::rff ? "rff" : "nystrom"; }

MapKind parse_map_kind(const std::string& s) {
  if (s == "rff") return MapKind::rff;
  if (s == "nystrom") return MapKind::nystrom;
  throw ConfigError("unknown method '" + s + "' (expected rff or nystrom)");
}

FeatureMap FeatureMap::rff(KernelSpec kernel, Eigen::MatrixXd omega) {
  if (!kernel.translation_invariant())
    throw ConfigError("RFF requires a translation-invariant similarity kernel; " +
                      std::string(kernel.similarity().kind == SimilarityKind::linear ? "linear" : "polynomial") +
                      " similarity is not translation invariant");
  if (omega.cols() != kernel.dim() || omega.rows() < 1) throw ConfigError("RFF: frequency matrix has the wrong shape");
  FeatureMap m(std::move(kernel));
  m.kind_ = MapKind::rff;
  m.rank_ = static_cast<int>(omega.rows());
  m.omega_frame_ = omega * m.kernel_.frame();
  m.omega_ = std::move(omega);
  return m;
}

FeatureMap FeatureMap::nystrom(KernelSpec kernel, SampleSet landmarks) {
  if (landmarks.empty()) throw ConfigError("Nystrom: at least one landmark is required");
  FeatureMap m(std::move(kernel));
  m.kind_ = MapKind::nystrom;
  m.rank_ = static_cast<int>(landmarks.size());
  const Eigen::MatrixXd lz = kernel_matrix(m.kernel_, landmarks);
  const HermitianEig eig = hermitian_eig(lz.cast<cplx>());
  const double top = eig.values.size() ? eig.values[0] : 0.0;
  if (!(top > 0.0)) throw NumericError("Nystrom: landmark kernel matrix is numerically zero");
  Eigen::VectorXd inv_sqrt(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    inv_sqrt[i] = eig.values[i] > 1e-10 * top ? 1.0 / std::sqrt(eig.values[i]) : 0.0;
  m.w_ = (eig.vectors * inv_sqrt.cast<cplx>().asDiagonal() * eig.vectors.adjoint()).real();
  m.w_ = 0.5 * (m.w_ + m.w_.transpose()).eval();
  m.landmarks_ = std::move(landmarks);
  return m;
}

Eigen::VectorXcd FeatureMap::eval_B(const Point& x) const {
  if (x.size() != kernel_.dim()) throw ConfigError("eval_B: point dimension mismatch");
  Eigen::VectorXcd b(rank_);
  if (kind_ == MapKind::rff) {
    const double scale = kernel_.quality_value(x) / std::sqrt(static_cast<double>(rank_));
    for (int j = 0; j < rank_; ++j) b[j] = std::polar(scale, omega_.row(j).dot(x));
  } else {
    Eigen::VectorXd ell(rank_);
    for (int n = 0; n < rank_; ++n) ell[n] = kernel_.eval(landmarks_[n], x);
    b = (w_ * ell).cast<cplx>();
  }
  return b;
}

double FeatureMap::approx_kernel(const Point& x, const Point& y) const { return eval_B(x).dot(eval_B(y)).real(); }

SeparableDensity FeatureMap::phase2_density(const std::vector<Eigen::VectorXcd>& vs) const {
  if (vs.empty()) throw ConfigError("phase2: empty eigenvector set");
  // P_jk = mean over v of conj(v_j) v_k
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(rank_, rank_);
  for (const auto& v : vs) p += v.conjugate() * v.transpose();
  p /= static_cast<double>(vs.size());

  if (kind_ == MapKind::nystrom) {
    const Eigen::MatrixXd q = w_ * p.real() * w_;
    return quadratic_density(kernel_, landmarks_, 0.5 * (q + q.transpose()), 0.0);
  }

  SeparableDensity dens(kernel_.frame_lower(), kernel_.frame_upper());
  std::vector<AxisFactor> q2 = kernel_.quality_factors();
  for (auto& f : q2) f.precision *= 2.0;
  const double inv_d = 1.0 / rank_;
  for (int j = 0; j < rank_; ++j) {
    for (int k = j; k < rank_; ++k) {
      const cplx c = (j == k) ? cplx(p(j, j).real(), 0.0) : 2.0 * p(j, k);
      if (c == 0.0) continue;
      SepTerm t;
      t.coef = c * inv_d;
      t.factors = q2;
      for (int l = 0; l < kernel_.dim(); ++l) t.factors[l].freq = omega_frame_(j, l) - omega_frame_(k, l);
      dens.add(std::move(t));
    }
  }
  return dens;
}

nlohmann::json FeatureMap::to_json() const {
  auto rows = [](const Eigen::MatrixXd& m) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> r(m.cols());
      for (Eigen::Index j = 0; j < m.cols(); ++j) r[j] = m(i, j);
      a.push_back(r);
    }
    return a;
  };
  nlohmann::json j;
  j["method"] = map_kind_name(kind_);
  j["rank"] = rank_;
  j["kernel"] = kernel_.to_json();
  if (kind_ == MapKind::rff) {
    j["frequencies"] = rows(omega_);
  } else {
    nlohmann::json z = nlohmann::json::array();
    for (const auto& p : landmarks_) z.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    j["landmarks"] = z;
    j["weights"] = rows(w_);
  }
  return j;
}

FeatureMap FeatureMap::from_json(const nlohmann::json& j) {
  try {
    KernelSpec kern = KernelSpec::from_json(j.at("kernel"));
    const MapKind kind = parse_map_kind(j.at("method").get<std::string>());
    const int d = kern.dim();
    if (kind == MapKind::rff) {
      const auto& f = j.at("frequencies");
      Eigen::MatrixXd omega(f.size(), d);
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (static_cast<int>(f[i].size()) != d) throw ConfigError("map json: frequency dimension mismatch");
        for (int l = 0; l < d; ++l) omega(i, l) = f[i][l].get<double>();
      }
      return rff(std::move(kern), std::move(omega));
    }
    SampleSet z;
    for (const auto& p : j.at("landmarks")) {
      if (static_cast<int>(p.size()) != d) throw ConfigError("map json: landmark dimension mismatch");
      Point x(d);
      for (int l = 0; l < d; ++l) x[l] = p[l].get<double>();
      z.push_back(x);
    }
    return nystrom(std::move(kern), std::move(z));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("map json: ") + e.what());
  }
}

SampleSet draw_from_quality(const KernelSpec& kernel, int n, RngStream& rng) {
  SampleSet out;
  out.reserve(n);
  const Domain& dom = kernel.domain();
  const int d = kernel.dim();
  if (kernel.quality().kind == QualityKind::uniform) {
    for (int i = 0; i < n; ++i) {
      Point x(d);
      for (int l = 0; l < d; ++l) x[l] = rng.uniform(dom.lo[l], dom.hi[l]);
      out.push_back(std::move(x));
    }
    return out;
  }
  const auto& q = kernel.quality();
  for (int i = 0; i < n; ++i) {
    int tries = 0;
    while (true) {
      Point x = rng.mvn(q.center, q.cov);
      if (dom.contains(x)) {
        out.push_back(std::move(x));
        break;
      }
      if (++tries > 100000) throw NumericError("landmark draw: domain has negligible quality mass");
    }
  }
  return out;
}

FeatureMap build_rff(const KernelSpec& kernel, int D, RngStream& rng) {
  if (D < 1) throw ConfigError("RFF: rank must be positive");
  if (!kernel.translation_invariant())
    throw ConfigError("RFF requires a translation-invariant similarity kernel; linear and polynomial kernels are not");
  const int d = kernel.dim();
  Eigen::MatrixXd omega(D, d);
  const auto& s = kernel.similarity();
  if (s.kind == SimilarityKind::gaussian) {
    const Eigen::MatrixXd prec = s.cov.llt().solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < D; ++j) omega.row(j) = rng.mvn(zero, prec).transpose();
  } else {
    for (int j = 0; j < D; ++j)
      for (int l = 0; l < d; ++l)
        omega(j, l) = s.kind == SimilarityKind::laplacian ? rng.cauchy(0.0, 1.0 / s.scale) : rng.laplace(0.0, 1.0 / s.scale);
  }
  return FeatureMap::rff(kernel, std::move(omega));
}

FeatureMap build_nystrom(const KernelSpec& kernel, int D, RngStream& rng) {
  if (D < 1) throw ConfigError("Nystrom: rank must be positive");
  return FeatureMap::nystrom(kernel, draw_from_quality(kernel, D, rng));
}

FeatureMap build_map(const KernelSpec& kernel, MapKind kind, int D, RngStream& rng) {
  return kind == MapKind::rff ? build_rff(kernel, D, rng) : build_nystrom(kernel, D, rng);
}

Eigen::MatrixXcd dual_matrix(const FeatureMap& map, Exec exec) {
  const KernelSpec& kern = map.kernel();
  const int D = map.rank();
  if (map.kind() == MapKind::nystrom) {
    const Eigen::MatrixXd a = slice_gram(kern, map.landmarks());
    const Eigen::MatrixXd c = map.weights() * a * map.weights();
    return (0.5 * (c + c.transpose())).cast<cplx>();
  }
  std::vector<AxisFactor> q2 = kern.quality_factors();
  for (auto& f : q2) f.precision *= 2.0;
  const Eigen::VectorXd lo = kern.frame_lower(), hi = kern.frame_upper();
  const Eigen::MatrixXd of = map.frequencies() * kern.frame();
  Eigen::MatrixXcd c(D, D);
  parallel_for(static_cast<std::size_t>(D), exec, [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int k = j; k < D; ++k) {
      cplx v = 1.0 / D;
      for (int l = 0; l < kern.dim(); ++l) {
        AxisFactor f = q2[l];
        f.freq = of(j, l) - of(k, l);
        v *= axis_integral(f, lo[l], hi[l]);
      }
      c(j, k) = v;
      c(k, j) = std::conj(v);
    }
  });
  return c;
}

Eigen::VectorXcd eval_B(const FeatureMap& map, const Point& x) { return map.eval_B(x); }

double phase2_cdf(const FeatureMap& map, const std::vector<Eigen::VectorXcd>& vs, int axis,
                  std::span<const double> prefix, double t) {
  return map.phase2_density(vs).conditional(axis, prefix).cdf(t);
}

}  // namespace cdpp
