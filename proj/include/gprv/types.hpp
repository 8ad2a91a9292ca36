#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "gprv/error.hpp"

namespace gprv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// m x k loadings: rows are variables, columns are components.
using LoadingMatrix = Matrix;
/// k x k orthogonal transformation, rotated loadings = A * T.
using TransformationMatrix = Matrix;
/// n x m raw data: rows are cases, columns are variables.
using DataMatrix = Matrix;
using CorrelationMatrix = Matrix;

inline bool all_finite(const Matrix& x) { return x.allFinite(); }

inline void require_finite(const Matrix& x, const char* what) {
  if (!x.allFinite()) throw Error(ErrorKind::invalid_input, std::string(what) + " has non-finite entries");
}

inline void require_nonempty(const Matrix& x, const char* what) {
  if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorKind::invalid_input, std::string(what) + " is empty");
}

/// Frobenius norm of T'T - I.
inline double orthogonality_error(const TransformationMatrix& t) {
  return (t.transpose() * t - Matrix::Identity(t.cols(), t.cols())).norm();
}

}  // namespace gprv
