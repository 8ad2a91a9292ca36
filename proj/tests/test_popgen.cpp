#include <gtest/gtest.h>

#include <filesystem>
#include <algorithm>

#include "gprv/popgen.hpp"

using namespace gprv;

namespace {

const PopulationModel& population_k3() {
  static const PopulationModel pop = [] {
    PopulationSpec spec;
    spec.k = 3;
    spec.cases = 100'000;
    spec.seed = 5;
    return generate_population(spec);
  }();
  return pop;
}

}  // namespace

TEST(Population, OrthogonalScoresHaveIdentityCorrelation) {
  Rng rng(3);
  const Matrix s = orthogonal_scores(5'000, 21, rng);
  const Matrix cov = s.transpose() * s / (5'000 - 1.0);
  EXPECT_LE((cov - Matrix::Identity(21, 21)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(s.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Population, ComponentLoadingsAreSixtyOne) {
  const PopulationModel& pop = population_k3();
  const Matrix abs = pop.pop_component_loadings.cwiseAbs();
  EXPECT_NEAR(abs.rowwise().maxCoeff().mean(), 0.61, 0.005);
  // Exact value for a = .5: 1.5 / sqrt(6).
  EXPECT_NEAR(abs.maxCoeff(), 1.5 / std::sqrt(6.0), 1e-8);
  for (int j = 0; j < 3; ++j) {
    int dominant = 0, small = 0;
    for (int i = 0; i < 18; ++i) {
      dominant += abs(i, j) >= 0.55;
      small += abs(i, j) <= 0.1;
    }
    EXPECT_EQ(dominant, 6);
    EXPECT_EQ(small, 12);
  }
}

TEST(Population, VariablesHaveUnitVariance) {
  const PopulationModel& pop = population_k3();
  const Matrix centered = pop.data.rowwise() - pop.data.colwise().mean();
  const Vector var = centered.colwise().squaredNorm().transpose() / (pop.data.rows() - 1.0);
  EXPECT_LE((var.array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(Population, EigenvalueStructure) {
  const PopulationModel& pop = population_k3();
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(pop.eigenvalues(j), 2.25, 1e-8);
  for (int j = 3; j < 18; ++j) EXPECT_NEAR(pop.eigenvalues(j), 0.75, 1e-8);
}

TEST(BackCheck, ResolvesFormulaReading) {
  const BackCheckInputs in = back_check_inputs(population_k3());
  // Reading one: sqrt(a* (1 - (1 - h2)/lambda*)); reading two squares a*.
  const double reading_one = std::sqrt(in.a_star * (1.0 - (1.0 - in.h2) / in.lambda_star));
  const double reading_two = std::sqrt(in.a_star * in.a_star * (1.0 - (1.0 - in.h2) / in.lambda_star));
  EXPECT_GT(std::abs(reading_one - 0.5), 0.1);
  EXPECT_NEAR(reading_two, 0.5, 0.01);
  EXPECT_DOUBLE_EQ(back_check_factor_loading(in.a_star, in.h2, in.lambda_star), reading_two);
}

TEST(BackCheck, EdgeCases) {
  EXPECT_DOUBLE_EQ(back_check_factor_loading(0.61, 1.0, 2.0), 0.61);
  EXPECT_THROW(back_check_factor_loading(0.61, 0.0, 0.5), Error);
  EXPECT_THROW(back_check_factor_loading(0.61, 0.5, 0.0), Error);
}

TEST(Population, InsufficientCases) {
  PopulationSpec spec;
  spec.k = 3;
  spec.cases = 20;
  try {
    generate_population(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_cases);
  }
}

TEST(DrawSample, DeterministicWithoutReplacement) {
  PopulationSpec spec;
  spec.k = 2;
  spec.cases = 500;
  const PopulationModel pop = generate_population(spec);
  Rng a(1), b(1);
  const Matrix s1 = draw_sample(pop, 100, a);
  EXPECT_EQ(s1, draw_sample(pop, 100, b));

  Rng c(2);
  const Matrix all = draw_sample(pop, 500, c);
  // Every population row appears exactly once.
  auto sorted_rows = [](const Matrix& m) {
    std::vector<std::vector<double>> v;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
      v.push_back(row);
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted_rows(all), sorted_rows(pop.data));
  EXPECT_THROW(draw_sample(pop, 501, c), Error);
  EXPECT_THROW(draw_sample(pop, 1, c), Error);
}

TEST(PopulationCache, RoundTrip) {
  PopulationSpec spec;
  spec.k = 2;
  spec.cases = 300;
  spec.seed = 77;
  const PopulationModel pop = generate_population(spec);
  const auto path = std::filesystem::temp_directory_path() / "gprv_population_test.bin";
  save_population(pop, path.string());
  const PopulationModel back = load_population(path.string());
  EXPECT_EQ(back.data, pop.data);
  EXPECT_EQ(back.pop_component_loadings, pop.pop_component_loadings);
  EXPECT_EQ(back.spec.seed, 77u);
  std::filesystem::remove(path);
  EXPECT_THROW(load_population(path.string()), Error);
}
