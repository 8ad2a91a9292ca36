#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gprv/metrics.hpp"
#include "gprv/types.hpp"

namespace gprv::test {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = normal(rng);
  return x;
}

/// Six .61 loadings per column in disjoint blocks, zeros elsewhere.
inline Matrix perfect_structure(int k, double loading = 0.61) {
  Matrix a = Matrix::Zero(6 * k, k);
  for (int j = 0; j < k; ++j) a.block(6 * j, j, 6, 1).setConstant(loading);
  return a;
}

inline Matrix planar_rotation(double theta) {
  Matrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

/// Varimax criterion written out with plain loops, independent of the
/// library's vectorized version.
inline double varimax_by_loops(const Matrix& l) {
  const auto m = static_cast<double>(l.rows());
  double total = 0.0;
  for (Eigen::Index j = 0; j < l.cols(); ++j) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) mean += l(i, j) * l(i, j) / m;
    double var = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) var += std::pow(l(i, j) * l(i, j) - mean, 2) / m;
    total += var;
  }
  return total / static_cast<double>(l.cols());
}

/// Loadings that look like a rotated simple-structure PCA solution with noise.
inline Matrix noisy_structure(int k, std::mt19937_64& rng, double noise = 0.08) {
  Matrix a = perfect_structure(k) + random_matrix(6 * k, k, rng, noise);
  Eigen::HouseholderQR<Matrix> qr(random_matrix(k, k, rng));
  return a * Matrix(qr.householderQ());
}

/// Central finite differences of Q = -v, step 1e-6.
inline Matrix finite_difference_gradient(const Matrix& l) {
  const double h = 1e-6;
  Matrix g(l.rows(), l.cols());
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    for (Eigen::Index j = 0; j < l.cols(); ++j) {
      Matrix plus = l, minus = l;
      plus(i, j) += h;
      minus(i, j) -= h;
      g(i, j) = -(varimax_by_loops(plus) - varimax_by_loops(minus)) / (2 * h);
    }
  return g;
}

/// Brute force over all k! column permutations.
inline double best_total_by_enumeration(const Matrix& lambda, const Matrix& pop) {
  std::vector<int> perm(static_cast<std::size_t>(pop.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  do {
    double total = 0.0;
    for (std::size_t j = 0; j < perm.size(); ++j)
      total += std::abs(tucker_congruence(lambda.col(perm[j]), pop.col(static_cast<Eigen::Index>(j))));
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace gprv::test
