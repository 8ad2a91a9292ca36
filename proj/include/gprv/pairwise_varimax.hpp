#pragma once

// Classic Varimax by successive planar rotations of column pairs (Kaiser's
// closed-form angle). Serves as the reference rotation in the simulation.

#include <cmath>

#include "gprv/normalization.hpp"
#include "gprv/rotation.hpp"

namespace gprv {

struct PairwiseParams {
  int max_cycles = 250;
  double angle_tol = 1e-9;
  bool kaiser_normalize = false;
};

/// Angle that maximizes the Varimax contribution of the column pair (x, y)
/// when rotating x' = x cos + y sin, y' = -x sin + y cos.
inline double pairwise_varimax_angle(const Vector& x, const Vector& y) {
  const auto m = static_cast<double>(x.size());
  const Eigen::ArrayXd u = x.array().square() - y.array().square();
  const Eigen::ArrayXd v = 2.0 * x.array() * y.array();
  const double a = u.sum();
  const double b = v.sum();
  const double c = (u.square() - v.square()).sum();
  const double d = 2.0 * (u * v).sum();
  const double num = d - 2.0 * a * b / m;
  const double den = c - (a * a - b * b) / m;
  return 0.25 * std::atan2(num, den);
}

/// Rotates a toward the Varimax maximum by cycling over all column pairs.
///
/// With Kaiser normalization the rotation runs on row-normalized loadings;
/// lambda is returned on the original scale while criterion_v (and f_trace)
/// refer to the normalized loadings that were optimized. f_trace holds the
/// objective after each completed cycle.
inline RotationSolution pairwise_varimax(const LoadingMatrix& a, const PairwiseParams& params = {}) {
  require_nonempty(a, "loading matrix");
  require_finite(a, "loading matrix");
  if (params.max_cycles < 1) throw Error(ErrorKind::invalid_input, "max_cycles must be >= 1");
  const auto k = a.cols();
  if (a.rows() < k) throw Error(ErrorKind::invalid_input, "loading matrix needs m >= k");

  LoadingMatrix work = a;
  RowScales scales;
  if (params.kaiser_normalize) std::tie(work, scales) = kaiser_normalize(a);

  RotationSolution sol;
  sol.t = Matrix::Identity(k, k);
  sol.f_initial = -detail::varimax_unchecked(work);

  if (k >= 2) {
    for (int cycle = 0; cycle < params.max_cycles; ++cycle) {
      double largest = 0.0;
      for (Eigen::Index j = 0; j < k - 1; ++j) {
        for (Eigen::Index l = j + 1; l < k; ++l) {
          const double phi = pairwise_varimax_angle(work.col(j), work.col(l));
          largest = std::max(largest, std::abs(phi));
          if (phi == 0.0) continue;
          const double cs = std::cos(phi);
          const double sn = std::sin(phi);
          const Vector wj = work.col(j);
          work.col(j) = cs * wj + sn * work.col(l);
          work.col(l) = -sn * wj + cs * work.col(l);
          const Vector tj = sol.t.col(j);
          sol.t.col(j) = cs * tj + sn * sol.t.col(l);
          sol.t.col(l) = -sn * tj + cs * sol.t.col(l);
        }
      }
      ++sol.iterations;
      sol.f_trace.push_back(-detail::varimax_unchecked(work));
      if (largest < params.angle_tol) {
        sol.converged = true;
        break;
      }
    }
  } else {
    sol.converged = true;
  }

  sol.criterion_v = detail::varimax_unchecked(work);
  sol.f_value = -sol.criterion_v;
  sol.lambda = params.kaiser_normalize ? kaiser_denormalize(work, scales) : work;
  return sol;
}

}  // namespace gprv
