#pragma once

// Tucker congruence, component matching and loading-recovery statistics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gprv/types.hpp"

namespace gprv {

/// Column j of the population matrix is matched by column perm[j] of the
/// sample matrix, multiplied by signs[j].
struct Matching {
  std::vector<Eigen::Index> perm;
  std::vector<int> signs;
  std::vector<double> per_component_c;
};

inline double tucker_congruence(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::invalid_input, "vector lengths differ");
  const double xx = x.squaredNorm();
  const double yy = y.squaredNorm();
  if (!(xx > 0.0) || !(yy > 0.0)) throw Error(ErrorKind::undefined_congruence, "zero vector");
  const double c = x.dot(y) / std::sqrt(xx * yy);
  return std::clamp(c, -1.0, 1.0);
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method,
/// O(k^3)). Returns assign[row] = column.
inline std::vector<Eigen::Index> solve_assignment(const Matrix& cost) {
  const auto n = cost.rows();
  if (cost.cols() != n) throw Error(ErrorKind::invalid_input, "assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  const auto sz = static_cast<std::size_t>(n + 1);
  // 1-based potentials; p[col] = row assigned to col.
  std::vector<double> u(sz, 0.0), v(sz, 0.0);
  std::vector<Eigen::Index> p(sz, 0), way(sz, 0);
  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::vector<double> minv(sz, inf);
    std::vector<char> used(sz, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Eigen::Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[js];
        if (cur < minv[js]) {
          minv[js] = cur;
          way[js] = j0;
        }
        if (minv[js] < delta) {
          delta = minv[js];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) {
          u[static_cast<std::size_t>(p[js])] += delta;
          v[js] -= delta;
        } else {
          minv[js] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index j = 1; j <= n; ++j) assign[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assign;
}

/// Congruences between every population column (rows) and sample column (cols).
inline Matrix congruence_matrix(const LoadingMatrix& lambda, const LoadingMatrix& pop) {
  if (lambda.rows() != pop.rows() || lambda.cols() != pop.cols())
    throw Error(ErrorKind::invalid_input, "loading matrices differ in shape");
  const Vector ln = lambda.colwise().norm().transpose();
  const Vector pn = pop.colwise().norm().transpose();
  if (!(ln.minCoeff() > 0.0) || !(pn.minCoeff() > 0.0))
    throw Error(ErrorKind::undefined_congruence, "zero loading column");
  Matrix c = pn.cwiseInverse().asDiagonal() * (pop.transpose() * lambda) * ln.cwiseInverse().asDiagonal();
  return c.cwiseMax(-1.0).cwiseMin(1.0);
}

/// Permutation and reflections of lambda's columns that maximize the summed
/// absolute congruence with pop.
inline Matching match_components(const LoadingMatrix& lambda, const LoadingMatrix& pop) {
  require_nonempty(pop, "population loadings");
  const Matrix c = congruence_matrix(lambda, pop);
  const auto perm = solve_assignment(-c.cwiseAbs());
  Matching out;
  out.perm = perm;
  const auto k = static_cast<std::size_t>(pop.cols());
  out.signs.resize(k);
  out.per_component_c.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double cj = c(static_cast<Eigen::Index>(j), perm[j]);
    out.signs[j] = cj < 0.0 ? -1 : 1;
    out.per_component_c[j] = std::abs(cj);
  }
  return out;
}

inline double mean_congruence(const Matching& matching) {
  if (matching.per_component_c.empty()) throw Error(ErrorKind::invalid_input, "empty matching");
  double s = 0.0;
  for (double c : matching.per_component_c) s += c;
  return s / static_cast<double>(matching.per_component_c.size());
}

/// Columns of lambda reordered and reflected to line up with the population.
inline LoadingMatrix align(const LoadingMatrix& lambda, const Matching& matching) {
  if (static_cast<std::size_t>(lambda.cols()) != matching.perm.size())
    throw Error(ErrorKind::invalid_input, "matching does not fit the loading matrix");
  LoadingMatrix out(lambda.rows(), lambda.cols());
  for (std::size_t j = 0; j < matching.perm.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = matching.signs[j] * lambda.col(matching.perm[j]);
  return out;
}

/// Root mean square difference over all m*k entries after alignment.
inline double rmse_loadings(const LoadingMatrix& lambda, const LoadingMatrix& pop, const Matching& matching) {
  if (lambda.rows() != pop.rows() || lambda.cols() != pop.cols())
    throw Error(ErrorKind::invalid_input, "loading matrices differ in shape");
  const LoadingMatrix diff = align(lambda, matching) - pop;
  return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
}

}  // namespace gprv
