#pragma once

// Finite populations with perfect orthogonal simple structure.
//
// Common and unique factor scores are taken from a full principal component
// decomposition of standard normal data, which makes them exactly
// uncorrelated with unit variance in the finite population. Observed
// variables follow Z = F A' + U D'.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "gprv/pairwise_varimax.hpp"
#include "gprv/multistart.hpp"
#include "gprv/pca.hpp"
#include "gprv/seeding.hpp"

namespace gprv {

struct PopulationSpec {
  int k = 3;
  double main_loading = 0.5;
  std::int64_t cases = 50'000;
  std::uint64_t seed = 1;

  int variables() const { return 6 * k; }

  void validate() const {
    if (k < 1) throw Error(ErrorKind::invalid_input, "population needs k >= 1");
    if (!(main_loading > 0.0 && main_loading < 1.0))
      throw Error(ErrorKind::invalid_input, "main loading must lie in (0, 1)");
    if (cases < static_cast<std::int64_t>(variables() + k))
      throw Error(ErrorKind::insufficient_cases, "population needs at least m + k cases");
  }
};

struct PopulationModel {
  PopulationSpec spec;
  LoadingMatrix factor_pattern;  // a on six-variable blocks, 0 elsewhere
  double error_loading = 0.0;    // d = sqrt(1 - a^2)
  DataMatrix data;               // N x m observed variables
  Vector eigenvalues;            // of the population correlation matrix, descending
  LoadingMatrix pop_component_loadings;  // Varimax-rotated, k components
};

inline LoadingMatrix simple_structure_pattern(int k, double a) {
  LoadingMatrix p = LoadingMatrix::Zero(6 * k, k);
  for (int j = 0; j < k; ++j) p.block(6 * j, j, 6, 1).setConstant(a);
  return p;
}

namespace detail {

inline void finish_population(PopulationModel& pop) {
  const CorrelationMatrix r = correlation_matrix(pop.data);
  pop.eigenvalues = sorted_eigensystem(r).values;
  pop.pop_component_loadings = pairwise_varimax(pca_loadings(r, pop.spec.k)).lambda;
}

}  // namespace detail

/// Uncorrelated unit-variance score columns: all principal component scores of
/// z-standardized normal data.
inline Matrix orthogonal_scores(std::int64_t cases, Eigen::Index columns, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(cases, columns);
  for (Eigen::Index j = 0; j < columns; ++j)
    for (Eigen::Index i = 0; i < cases; ++i) x(i, j) = normal(rng);
  const auto n = static_cast<double>(cases);
  x.rowwise() -= x.colwise().mean();
  const Eigen::RowVectorXd sd = (x.colwise().squaredNorm() / (n - 1.0)).cwiseSqrt();
  x.array().rowwise() /= sd.array();
  Matrix r(columns, columns);
  r.setZero();
  r.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / (n - 1.0));
  r = r.selfadjointView<Eigen::Lower>();
  const EigenSystem es = sorted_eigensystem(r);
  if (!(es.values.minCoeff() > 1e-12))
    throw Error(ErrorKind::invalid_correlation, "preliminary scores are rank deficient");
  const Matrix w = es.vectors * es.values.cwiseSqrt().cwiseInverse().asDiagonal();
  return x * w;
}

inline PopulationModel generate_population(const PopulationSpec& spec) {
  spec.validate();
  const int k = spec.k;
  const int m = spec.variables();
  Rng rng(derive_seed(spec.seed, {0x706f70ULL, static_cast<std::uint64_t>(k),
                                  static_cast<std::uint64_t>(spec.cases)}));

  PopulationModel pop;
  pop.spec = spec;
  pop.factor_pattern = simple_structure_pattern(k, spec.main_loading);
  pop.error_loading = std::sqrt(1.0 - spec.main_loading * spec.main_loading);

  const Matrix scores = orthogonal_scores(spec.cases, k + m, rng);
  pop.data = scores.leftCols(k) * pop.factor_pattern.transpose() + pop.error_loading * scores.rightCols(m);
  detail::finish_population(pop);
  return pop;
}

/// Factor loading recovered from a component loading a*, communality h2 and
/// component eigenvalue lambda*: a = a* sqrt(1 - (1 - h2) / lambda*).
inline double back_check_factor_loading(double a_star, double h2, double lambda_star) {
  if (!(lambda_star > 0.0)) throw Error(ErrorKind::domain, "eigenvalue must be positive");
  if (!(h2 >= 0.0 && h2 <= 1.0)) throw Error(ErrorKind::domain, "communality must lie in [0, 1]");
  const double arg = a_star * a_star * (1.0 - (1.0 - h2) / lambda_star);
  if (arg < 0.0) throw Error(ErrorKind::domain, "negative argument of square root");
  return std::sqrt(arg);
}

/// Inputs to the back-check taken from a generated population: mean main
/// loading, top eigenvalue, and the communality implied by the unique
/// variance (mean of the m - k trailing eigenvalues).
struct BackCheckInputs {
  double a_star = 0.0;
  double h2 = 0.0;
  double lambda_star = 0.0;
};

inline BackCheckInputs back_check_inputs(const PopulationModel& pop) {
  const int k = pop.spec.k;
  const int m = pop.spec.variables();
  const Matrix abs_loadings = pop.pop_component_loadings.cwiseAbs();
  double main_sum = 0.0;
  for (int i = 0; i < m; ++i) main_sum += abs_loadings.row(i).maxCoeff();
  BackCheckInputs in;
  in.a_star = main_sum / m;
  in.lambda_star = pop.eigenvalues(0);
  in.h2 = 1.0 - pop.eigenvalues.tail(m - k).mean();
  return in;
}

/// n distinct cases drawn without replacement.
inline DataMatrix draw_sample(const PopulationModel& pop, std::int64_t n, Rng& rng) {
  const std::int64_t cases = pop.data.rows();
  if (n < 2 || n > cases) throw Error(ErrorKind::invalid_input, "sample size must lie in [2, N]");
  std::vector<std::int64_t> index(static_cast<std::size_t>(cases));
  std::iota(index.begin(), index.end(), std::int64_t{0});
  DataMatrix out(n, pop.data.cols());
  for (std::int64_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::int64_t> pick(i, cases - 1);
    std::swap(index[static_cast<std::size_t>(i)], index[static_cast<std::size_t>(pick(rng))]);
    out.row(i) = pop.data.row(index[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Population cache: magic, k, cases, main loading, seed, then the N x m data
// row-major as little-endian doubles.
inline constexpr char kPopulationMagic[8] = {'G', 'P', 'R', 'V', 'P', 'O', 'P', '1'};

inline std::uint64_t population_key(const PopulationSpec& spec) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(spec.main_loading));
  std::memcpy(&bits, &spec.main_loading, sizeof(bits));
  return derive_seed(spec.seed, {static_cast<std::uint64_t>(spec.k), static_cast<std::uint64_t>(spec.cases), bits});
}

inline void save_population(const PopulationModel& pop, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path);
  const std::int64_t k = pop.spec.k;
  out.write(kPopulationMagic, sizeof(kPopulationMagic));
  out.write(reinterpret_cast<const char*>(&k), sizeof(k));
  out.write(reinterpret_cast<const char*>(&pop.spec.cases), sizeof(pop.spec.cases));
  out.write(reinterpret_cast<const char*>(&pop.spec.main_loading), sizeof(double));
  out.write(reinterpret_cast<const char*>(&pop.spec.seed), sizeof(pop.spec.seed));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = pop.data;
  out.write(reinterpret_cast<const char*>(rows.data()), static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!out) throw Error(ErrorKind::io, "failed writing " + path);
}

inline PopulationModel load_population(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  char magic[sizeof(kPopulationMagic)];
  std::int64_t k = 0;
  PopulationModel pop;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&k), sizeof(k));
  in.read(reinterpret_cast<char*>(&pop.spec.cases), sizeof(pop.spec.cases));
  in.read(reinterpret_cast<char*>(&pop.spec.main_loading), sizeof(double));
  in.read(reinterpret_cast<char*>(&pop.spec.seed), sizeof(pop.spec.seed));
  if (!in || std::memcmp(magic, kPopulationMagic, sizeof(magic)) != 0)
    throw Error(ErrorKind::io, path + " is not a population cache file");
  pop.spec.k = static_cast<int>(k);
  pop.spec.validate();
  const int m = pop.spec.variables();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(pop.spec.cases, m);
  in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!in) throw Error(ErrorKind::io, path + " is truncated");
  pop.data = rows;
  pop.factor_pattern = simple_structure_pattern(pop.spec.k, pop.spec.main_loading);
  pop.error_loading = std::sqrt(1.0 - pop.spec.main_loading * pop.spec.main_loading);
  detail::finish_population(pop);
  return pop;
}

}  // namespace gprv
