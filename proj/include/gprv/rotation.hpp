#pragma once

// Orthogonal gradient projection rotation (GPR) toward the Varimax criterion.
//
// The rotation minimizes f(T) = Q(A T) over orthogonal T with Q = -v, where v
// is the Varimax criterion: the variance of squared loadings within each
// column, averaged over columns.

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <limits>
#include <vector>

#include "gprv/types.hpp"

namespace gprv {

struct GprParams {
  double alpha0 = 1.0;
  int max_iter = 1000;
  double grad_tol = 1e-6;
  int max_halvings = 30;

  void validate() const {
    if (!(alpha0 > 0.0) || !(grad_tol > 0.0) || max_iter < 1 || max_halvings < 1)
      throw Error(ErrorKind::invalid_input, "GPR parameters must be positive");
  }
};

struct RotationSolution {
  LoadingMatrix lambda;
  TransformationMatrix t;
  double f_value = 0.0;      // minimized objective, -criterion_v
  double criterion_v = 0.0;  // Varimax criterion of lambda
  double f_initial = 0.0;    // objective at the start transformation
  std::vector<double> f_trace;  // objective after every accepted step
  bool converged = false;
  int iterations = 0;
};

namespace detail {

inline double varimax_unchecked(const Matrix& lambda) {
  const auto m = static_cast<double>(lambda.rows());
  const auto k = static_cast<double>(lambda.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < lambda.cols(); ++j) {
    const auto sq = lambda.col(j).array().square();
    const double mean = sq.sum() / m;
    total += (sq - mean).square().sum() / m;
  }
  return total / k;
}

/// dQ/dLambda with Q = -v.
inline Matrix varimax_gradient_unchecked(const Matrix& lambda) {
  const auto m = static_cast<double>(lambda.rows());
  const auto k = static_cast<double>(lambda.cols());
  Matrix g(lambda.rows(), lambda.cols());
  const double scale = -4.0 / (k * m);
  for (Eigen::Index j = 0; j < lambda.cols(); ++j) {
    const auto col = lambda.col(j).array();
    const double mean = col.square().sum() / m;
    g.col(j) = scale * col * (col.square() - mean);
  }
  return g;
}

// Polar factor U V' of a full-rank square matrix; returns false when the
// smallest singular value falls below the rank threshold.
inline bool polar_factor(const Matrix& m, Matrix& out) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) >= 1e-12)) return false;
  out.noalias() = svd.matrixU() * svd.matrixV().transpose();
  return true;
}

// Same factor via the eigendecomposition of M'M, M (M'M)^{-1/2}. Adequate for
// the well-conditioned trial matrices of a GPR step and cheaper than an SVD.
inline bool polar_factor_fast(const Matrix& m, Matrix& out) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  const Vector& d = es.eigenvalues();
  if (es.info() != Eigen::Success || !(d(0) >= 1e-24)) return false;
  const Matrix& v = es.eigenvectors();
  out.noalias() = m * (v * d.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose());
  return true;
}

}  // namespace detail

/// Varimax criterion v = (1/k) sum_j (1/m) sum_i (l_ij^2 - s_j)^2 with s_j the
/// column mean of squared loadings.
inline double varimax_criterion(const LoadingMatrix& lambda) {
  require_nonempty(lambda, "loading matrix");
  require_finite(lambda, "loading matrix");
  return detail::varimax_unchecked(lambda);
}

/// Gradient of Q = -varimax_criterion with respect to the loadings.
inline Matrix varimax_gradient(const LoadingMatrix& lambda) {
  require_nonempty(lambda, "loading matrix");
  require_finite(lambda, "loading matrix");
  return detail::varimax_gradient_unchecked(lambda);
}

/// Nearest orthogonal matrix in Frobenius norm (polar factor of the SVD).
inline TransformationMatrix project_orthogonal(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw Error(ErrorKind::invalid_input, "projection needs a non-empty square matrix");
  require_finite(m, "matrix to project");
  TransformationMatrix t;
  if (!detail::polar_factor(m, t))
    throw Error(ErrorKind::degenerate_projection, "matrix is rank deficient");
  return t;
}

/// Tangent-space component of a gradient at orthogonal T: G - T sym(T'G).
inline Matrix project_tangent(const TransformationMatrix& t, const Matrix& g) {
  const Matrix tg = t.transpose() * g;
  return g - t * (0.5 * (tg + tg.transpose()));
}

/// Gradient projection rotation from start transformation t0.
///
/// Each iteration steps along the negative tangent gradient and maps the
/// result back to the orthogonal group. The step length is halved until f drops
/// by at least half the linear prediction; if no halving achieves that, the
/// first strictly lowering step is taken. The step length of the next
/// iteration starts at twice the last accepted one. If no halving lowers f the
/// current point is numerically stationary and is returned as converged.
inline RotationSolution gpr_rotate(const LoadingMatrix& a, const TransformationMatrix& t0,
                                   const GprParams& params = {}) {
  params.validate();
  require_nonempty(a, "loading matrix");
  require_finite(a, "loading matrix");
  const auto k = a.cols();
  if (a.rows() < k) throw Error(ErrorKind::invalid_input, "loading matrix needs m >= k");
  if (t0.rows() != k || t0.cols() != k)
    throw Error(ErrorKind::invalid_input, "start transformation has wrong shape");
  require_finite(t0, "start transformation");
  if (orthogonality_error(t0) > 1e-10)
    throw Error(ErrorKind::invalid_input, "start transformation is not orthogonal");

  RotationSolution sol;
  sol.t = t0;
  sol.lambda = a * t0;
  sol.f_value = -detail::varimax_unchecked(sol.lambda);
  sol.f_initial = sol.f_value;

  double alpha = params.alpha0;
  Matrix trial_t(k, k);
  Matrix trial_lambda(a.rows(), k);
  bool first = true;

  for (int iter = 0; iter < params.max_iter; ++iter) {
    const Matrix gf = a.transpose() * detail::varimax_gradient_unchecked(sol.lambda);
    const Matrix gp = project_tangent(sol.t, gf);
    if (gp.norm() < params.grad_tol) {
      sol.converged = true;
      break;
    }
    if (!first) alpha *= 2.0;
    first = false;

    // Prefer the first step with sufficient decrease; fall back to the first
    // strictly lowering step so the stopping rule stays plain descent.
    const double slope = gp.squaredNorm();
    bool accepted = false;
    double fallback_f = sol.f_value;
    double fallback_alpha = 0.0;
    Matrix fallback_t;
    for (int h = 0; h <= params.max_halvings; ++h) {
      if (!detail::polar_factor_fast(sol.t - alpha * gp, trial_t)) {
        alpha *= 0.5;
        continue;
      }
      trial_lambda.noalias() = a * trial_t;
      const double f = -detail::varimax_unchecked(trial_lambda);
      if (f < sol.f_value - 0.5 * alpha * slope) {
        accepted = true;
        break;
      }
      if (f < fallback_f && fallback_t.size() == 0) {
        fallback_f = f;
        fallback_alpha = alpha;
        fallback_t = trial_t;
      }
      alpha *= 0.5;
    }
    if (!accepted && fallback_t.size() != 0) {
      trial_t = fallback_t;
      trial_lambda.noalias() = a * trial_t;
      alpha = fallback_alpha;
      accepted = true;
    }
    if (accepted) {
      sol.t.swap(trial_t);
      sol.lambda.swap(trial_lambda);
      sol.f_value = -detail::varimax_unchecked(sol.lambda);
      sol.f_trace.push_back(sol.f_value);
    }
    ++sol.iterations;
    if (!accepted) {
      sol.converged = true;
      break;
    }
  }
  sol.criterion_v = -sol.f_value;
  return sol;
}

}  // namespace gprv
