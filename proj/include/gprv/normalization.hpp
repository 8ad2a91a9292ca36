#pragma once

// Kaiser row normalization of loadings.

#include <utility>

#include "gprv/types.hpp"

namespace gprv {

/// Row norms h_i = sqrt(sum_j a_ij^2); all strictly positive.
struct RowScales {
  Vector h;
};

inline constexpr double kZeroCommunality = 1e-12;

inline std::pair<LoadingMatrix, RowScales> kaiser_normalize(const LoadingMatrix& a) {
  require_nonempty(a, "loading matrix");
  require_finite(a, "loading matrix");
  RowScales scales{a.rowwise().norm()};
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (!(scales.h(i) >= kZeroCommunality))
      throw Error(ErrorKind::zero_communality, "row " + std::to_string(i) + " has zero norm");
  }
  LoadingMatrix out = scales.h.cwiseInverse().asDiagonal() * a;
  return {std::move(out), std::move(scales)};
}

inline LoadingMatrix kaiser_denormalize(const LoadingMatrix& lambda_norm, const RowScales& scales) {
  if (lambda_norm.rows() != scales.h.size())
    throw Error(ErrorKind::invalid_input, "row scales do not match the loading matrix");
  return scales.h.asDiagonal() * lambda_norm;
}

}  // namespace gprv
