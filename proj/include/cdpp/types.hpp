#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace cdpp {

using cplx = std::complex<double>;
using Point = Eigen::VectorXd;
using SampleSet = std::vector<Point>;

}  // namespace cdpp
