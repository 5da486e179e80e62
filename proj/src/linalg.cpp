#include "cdpp/linalg.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cdpp/error.hpp"

namespace cdpp {

HermitianEig hermitian_eig(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw ConfigError("hermitian_eig: matrix is not square");
  const Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("hermitian_eig: solver did not converge");

  const Eigen::Index n = sym.rows();
  HermitianEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Eigen::Index k = 0; k < n; ++k) {
    double lam = solver.eigenvalues()[n - 1 - k];
    if (lam < 0.0 && lam > -1e-10) lam = 0.0;
    out.values[k] = lam;
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  if (n > 0) {
    const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
    const double resid = (sym * out.vectors - out.vectors * out.values.asDiagonal()).cwiseAbs().maxCoeff();
    if (!(resid <= 1e-8 * scale * std::max<double>(1.0, double(n))))
      throw NumericError("hermitian_eig: residual " + std::to_string(resid) + " too large");
  }
  return out;
}

std::vector<Eigen::VectorXcd> gram_schmidt_c(std::vector<Eigen::VectorXcd> vs, const Eigen::MatrixXcd& c) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const cplx proj = vs[j].dot(c * vs[i]);  // conj(v_j)^T C v_i
      vs[i] -= proj * vs[j];
    }
    const double norm2 = vs[i].dot(c * vs[i]).real();
    if (!(norm2 > 1e-24))
      throw NumericError("gram_schmidt_c: rank deficiency (C-norm " + std::to_string(std::sqrt(std::max(norm2, 0.0))) +
                         " below 1e-12)");
    vs[i] /= std::sqrt(norm2);
  }
  return vs;
}

double log_det_psd(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXcd> llt(0.5 * (m + m.adjoint()));
  if (llt.info() == Eigen::Success) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double d = llt.matrixLLT()(i, i).real();
      if (!(d > 0.0)) return -std::numeric_limits<double>::infinity();
      s += 2.0 * std::log(d);
    }
    return s;
  }
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  double s = 0.0;
  for (double e : ev) {
    if (!(e > 0.0)) return -std::numeric_limits<double>::infinity();
    s += std::log(e);
  }
  return s;
}

double log_det_psd(const Eigen::MatrixXd& m) { return log_det_psd(Eigen::MatrixXcd(m.cast<cplx>())); }

bool common_eigenbasis(const std::vector<Eigen::MatrixXd>& mats, Eigen::MatrixXd& frame) {
  if (mats.empty()) return false;
  const Eigen::Index d = mats.front().rows();
  bool all_diagonal = true;
  for (const auto& m : mats) {
    const Eigen::MatrixXd off = m - Eigen::MatrixXd(m.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > 0.0) all_diagonal = false;
  }
  if (all_diagonal) {
    frame = Eigen::MatrixXd::Identity(d, d);
    return true;
  }
  // Generic combination separates the joint eigenspaces of commuting matrices.
  Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(d, d);
  const double weights[] = {1.0, 0.7548776662466927, 0.5698402909980532, 0.4301597090019468};
  for (std::size_t i = 0; i < mats.size(); ++i) combo += weights[i % 4] * (1.0 + double(i / 4)) * mats[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (combo + combo.transpose()));
  if (solver.info() != Eigen::Success) return false;
  frame = solver.eigenvectors();
  for (const auto& m : mats) {
    const Eigen::MatrixXd r = frame.transpose() * m * frame;
    const Eigen::MatrixXd off = r - Eigen::MatrixXd(r.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  }
  return true;
}

}  // namespace cdpp
