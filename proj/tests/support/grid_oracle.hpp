#pragma once

// Brute-force discrete k-DPP on a binned box: cell-centre kernel matrix scaled
// by the cell volume, every k-subset enumerated. Test-only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct GridTable {
  int bins_per_axis = 0;
  int dim = 0;
  std::vector<Eigen::VectorXd> centres;         // flattened cell index -> centre
  std::map<std::vector<int>, double> prob;      // sorted cell indices -> probability
  double total = 0.0;                           // sum before normalization (e_k)

  int cell_of(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
    int idx = 0;
    for (int l = 0; l < dim; ++l) {
      int c = static_cast<int>(std::floor((x[l] - lo[l]) / (hi[l] - lo[l]) * bins_per_axis));
      c = std::clamp(c, 0, bins_per_axis - 1);
      idx = idx * bins_per_axis + c;
    }
    return idx;
  }
};

inline GridTable discrete_grid_oracle(const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& kern,
                                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int bins, int k,
                                      double budget = 1e7) {
  GridTable t;
  t.dim = static_cast<int>(lo.size());
  if (t.dim < 1 || t.dim > 2) throw std::invalid_argument("grid oracle: d must be 1 or 2");
  t.bins_per_axis = bins;
  const int n = t.dim == 1 ? bins : bins * bins;
  double subsets = 1.0;
  for (int i = 0; i < k; ++i) subsets = subsets * (n - i) / (i + 1);
  if (subsets > budget) throw std::invalid_argument("grid oracle: enumeration budget exceeded");
  double vol = 1.0;
  for (int l = 0; l < t.dim; ++l) vol *= (hi[l] - lo[l]) / bins;
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd x(t.dim);
    int rem = c;
    for (int l = t.dim - 1; l >= 0; --l) {
      x[l] = lo[l] + (rem % bins + 0.5) * (hi[l] - lo[l]) / bins;
      rem /= bins;
    }
    t.centres.push_back(x);
  }
  Eigen::MatrixXd L(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) L(i, j) = L(j, i) = vol * kern(t.centres[i], t.centres[j]);

  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  Eigen::MatrixXd sub(k, k);
  while (k > 0) {
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) sub(a, b) = L(idx[a], idx[b]);
    const double det = std::max(0.0, sub.determinant());
    t.prob[idx] = det;
    t.total += det;
    int p = k - 1;
    while (p >= 0 && idx[p] == n - k + p) --p;
    if (p < 0) break;
    ++idx[p];
    for (int q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
  }
  for (auto& [key, v] : t.prob) v /= t.total;
  return t;
}

}  // namespace oracle
