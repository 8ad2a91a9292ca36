#pragma once

// Correlation matrices and unrotated principal component loadings.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>

#include "gprv/types.hpp"

namespace gprv {

/// Pearson correlations of the columns of x. The diagonal is exactly 1.
inline CorrelationMatrix correlation_matrix(const DataMatrix& x) {
  if (x.rows() < 2 || x.cols() < 1)
    throw Error(ErrorKind::invalid_input, "correlation needs at least two cases and one variable");
  require_finite(x, "data matrix");
  const auto n = static_cast<double>(x.rows());
  Matrix centered = x.rowwise() - x.colwise().mean();
  Vector sd = (centered.colwise().squaredNorm() / (n - 1.0)).transpose();
  for (Eigen::Index j = 0; j < sd.size(); ++j) {
    if (!(sd(j) > 1e-12))
      throw Error(ErrorKind::degenerate_variable, "variable " + std::to_string(j) + " has zero variance");
  }
  sd = sd.cwiseSqrt();
  centered = centered * sd.cwiseInverse().asDiagonal();
  CorrelationMatrix r(x.cols(), x.cols());
  r.setZero();
  r.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / (n - 1.0));
  r = r.selfadjointView<Eigen::Lower>();
  r.diagonal().setOnes();
  return r;
}

namespace detail {

// Flip v so its entry sum is nonnegative; near-zero sums defer to the first
// entry of largest magnitude.
inline void fix_sign(Eigen::Ref<Vector> v) {
  const double sum = v.sum();
  if (std::abs(sum) > 1e-12) {
    if (sum < 0.0) v = -v;
    return;
  }
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  // maxCoeff returns the first maximal index.
  if (v(arg) < 0.0) v = -v;
}

}  // namespace detail

struct EigenSystem {
  Vector values;   // descending
  Matrix vectors;  // columns match values, sign-fixed
};

/// Symmetric eigendecomposition with values in descending order. Eigenvectors
/// of exactly tied eigenvalues are ordered lexicographically (descending).
inline EigenSystem sorted_eigensystem(const Matrix& r) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(r);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::invalid_correlation, "eigendecomposition failed");
  const auto m = r.rows();
  Matrix vecs = solver.eigenvectors();
  for (Eigen::Index j = 0; j < m; ++j) detail::fix_sign(vecs.col(j));
  const Vector& vals = solver.eigenvalues();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const double tie = 1e-12 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(vals(a) - vals(b)) > tie) return vals(a) > vals(b);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(vecs(i, a) - vecs(i, b)) > 1e-12) return vecs(i, a) > vecs(i, b);
    }
    return false;
  });

  EigenSystem out{Vector(m), Matrix(m, m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    out.values(j) = vals(order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = vecs.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

/// Loadings of the k largest components: eigenvector_j * sqrt(eigenvalue_j).
inline LoadingMatrix pca_loadings(const CorrelationMatrix& r, Eigen::Index k) {
  if (r.rows() != r.cols() || r.rows() < 1)
    throw Error(ErrorKind::invalid_input, "correlation matrix must be square");
  if (k < 1 || k > r.rows()) throw Error(ErrorKind::invalid_input, "component count out of range");
  require_finite(r, "correlation matrix");
  const EigenSystem es = sorted_eigensystem(r);
  if (es.values(r.rows() - 1) < -1e-10)
    throw Error(ErrorKind::invalid_correlation, "correlation matrix has a negative eigenvalue");
  LoadingMatrix loadings(r.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    loadings.col(j) = es.vectors.col(j) * std::sqrt(std::max(es.values(j), 0.0));
    detail::fix_sign(loadings.col(j));
  }
  return loadings;
}

}  // namespace gprv
