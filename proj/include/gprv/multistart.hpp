#pragma once

// Random orthonormal starts, best-of-q multi-start GPR and adaptive stopping.

#include <Eigen/QR>

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "gprv/rotation.hpp"

namespace gprv {

using Rng = std::mt19937_64;

enum class StartKind { identity, random };

struct StartSpec {
  StartKind kind = StartKind::random;
  int q = 1;

  void validate() const {
    if (kind == StartKind::random && q < 1) throw Error(ErrorKind::invalid_input, "q must be >= 1");
  }
};

struct MultiStartResult {
  RotationSolution best;
  std::vector<double> all_criteria;  // -inf marks a failed start
  int q_used = 0;
};

/// Haar-distributed orthogonal matrix: QR of a standard normal matrix with
/// each column of Q multiplied by the sign of the matching diagonal of R.
inline TransformationMatrix random_orthonormal(Eigen::Index k, Rng& rng) {
  if (k < 1) throw Error(ErrorKind::invalid_input, "k must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Matrix g(k, k);
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < k; ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    if (!(r.diagonal().cwiseAbs().minCoeff() > 1e-12)) continue;
    Matrix q = qr.householderQ() * Matrix::Identity(k, k);
    for (Eigen::Index j = 0; j < k; ++j)
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
  }
}

/// Incremental best-of-q search over a single random stream. Starts are drawn
/// in order, so the first q' starts of a longer run equal a run of length q'.
class MultiStartSearch {
 public:
  MultiStartSearch(const LoadingMatrix& a, const GprParams& params, Rng& rng)
      : a_(a), params_(params), rng_(rng) {
    params_.validate();
  }

  /// Run further starts until q starts have been evaluated in total.
  void extend_to(int q) {
    while (static_cast<int>(criteria_.size()) < q) {
      const TransformationMatrix t0 = random_orthonormal(a_.cols(), rng_);
      try {
        RotationSolution sol = gpr_rotate(a_, t0, params_);
        criteria_.push_back(sol.criterion_v);
        if (!best_ || sol.criterion_v > best_->criterion_v) best_ = std::move(sol);
      } catch (const Error&) {
        criteria_.push_back(-std::numeric_limits<double>::infinity());
      }
    }
  }

  int starts() const { return static_cast<int>(criteria_.size()); }
  bool has_best() const { return best_.has_value(); }
  const RotationSolution& best() const { return *best_; }

  MultiStartResult snapshot() const {
    if (!best_) throw Error(ErrorKind::degenerate_projection, "every start failed");
    return {*best_, criteria_, starts()};
  }

 private:
  const LoadingMatrix& a_;
  GprParams params_;
  Rng& rng_;
  std::vector<double> criteria_;
  std::optional<RotationSolution> best_;
};

inline MultiStartResult multi_start_rotate(const LoadingMatrix& a, const StartSpec& spec,
                                           const GprParams& params, Rng& rng) {
  spec.validate();
  if (spec.kind == StartKind::identity) {
    RotationSolution sol = gpr_rotate(a, Matrix::Identity(a.cols(), a.cols()), params);
    const double v = sol.criterion_v;
    return {std::move(sol), {v}, 1};
  }
  MultiStartSearch search(a, params, rng);
  search.extend_to(spec.q);
  return search.snapshot();
}

inline void validate_schedule(const std::vector<int>& schedule) {
  if (schedule.empty()) throw Error(ErrorKind::invalid_input, "empty start schedule");
  if (schedule.front() < 1) throw Error(ErrorKind::invalid_input, "schedule must start at >= 1");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1]) throw Error(ErrorKind::invalid_input, "schedule must be strictly increasing");
}

/// Best-of-q results for every q of a schedule, sharing one nested start set.
inline std::vector<MultiStartResult> multi_start_schedule(const LoadingMatrix& a, const std::vector<int>& schedule,
                                                          const GprParams& params, Rng& rng) {
  validate_schedule(schedule);
  MultiStartSearch search(a, params, rng);
  std::vector<MultiStartResult> out;
  out.reserve(schedule.size());
  for (int q : schedule) {
    search.extend_to(q);
    out.push_back(search.snapshot());
  }
  return out;
}

/// Grows the nested start set along the schedule and stops at the first
/// schedule point whose successor improves the best criterion by <= eps_v.
inline MultiStartResult adaptive_rotate(const LoadingMatrix& a, const std::vector<int>& schedule, double eps_v,
                                        const GprParams& params, Rng& rng) {
  validate_schedule(schedule);
  if (!(eps_v > 0.0)) throw Error(ErrorKind::invalid_input, "eps_v must be positive");
  MultiStartSearch search(a, params, rng);
  search.extend_to(schedule.front());
  MultiStartResult previous = search.snapshot();
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    search.extend_to(schedule[i]);
    MultiStartResult current = search.snapshot();
    if (current.best.criterion_v - previous.best.criterion_v <= eps_v) return previous;
    previous = std::move(current);
  }
  return previous;
}

}  // namespace gprv
