#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cdpp/types.hpp"

namespace cdpp {

struct HermitianEig {
  Eigen::VectorXd values;    // descending
  Eigen::MatrixXcd vectors;  // column k pairs with values[k]
};

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized first;
/// eigenvalues in (-1e-10, 0) are clamped to zero.
HermitianEig hermitian_eig(const Eigen::MatrixXcd& m);

/// Modified Gram-Schmidt under <u, v> = u* C v. Throws NumericError when a
/// vector's C-norm drops below 1e-12 (rank deficiency).
std::vector<Eigen::VectorXcd> gram_schmidt_c(std::vector<Eigen::VectorXcd> vs, const Eigen::MatrixXcd& c);

/// log det of a Hermitian PSD matrix; -inf when singular.
double log_det_psd(const Eigen::MatrixXcd& m);
double log_det_psd(const Eigen::MatrixXd& m);

/// Orthogonal matrix T with T^T A T diagonal for every A in `mats`, when the
/// matrices commute. Returns false if no common eigenbasis exists.
bool common_eigenbasis(const std::vector<Eigen::MatrixXd>& mats, Eigen::MatrixXd& frame);

}  // namespace cdpp
