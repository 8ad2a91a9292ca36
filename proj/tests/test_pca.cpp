#include <gtest/gtest.h>

#include "gprv/pca.hpp"
#include "test_support.hpp"

using namespace gprv;

TEST(CorrelationMatrix, SimpleCases) {
  Matrix x(4, 3);
  x << 1, 1, -1, 2, 2, -2, 3, 4, -3, 4, 5, -4;
  const Matrix r = correlation_matrix(x);
  EXPECT_EQ(r.diagonal(), Vector::Ones(3));
  EXPECT_NEAR(r(0, 2), -1.0, 1e-15);
  // Hand Pearson for x = (1,2,3,4), y = (1,2,4,5): sxy = 7, sxx = 5, syy = 10.
  const double oracle = 7.0 / std::sqrt(5.0 * 10.0);
  EXPECT_NEAR(oracle, 0.98995, 1e-5);
  EXPECT_NEAR(r(0, 1), oracle, 1e-14);
  EXPECT_NEAR(r(1, 0), r(0, 1), 1e-15);

  Matrix dup(3, 2);
  dup << 1, 1, 2, 2, 5, 5;
  EXPECT_NEAR(correlation_matrix(dup)(0, 1), 1.0, 1e-15);
}

TEST(CorrelationMatrix, ZeroVarianceIsDegenerate) {
  Matrix x(3, 2);
  x << 1, 2, 1, 3, 1, 4;
  try {
    correlation_matrix(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_variable);
  }
}

TEST(PcaLoadings, IdentityGivesNaturalBasis) {
  EXPECT_EQ(pca_loadings(Matrix::Identity(4, 4), 4), Matrix::Identity(4, 4));
}

TEST(PcaLoadings, TwoByTwoHandOracle) {
  Matrix r(2, 2);
  r << 1, 0.5, 0.5, 1;
  // Eigenpairs 1.5 with (1,1)/sqrt2 and .5 with (1,-1)/sqrt2.
  const Matrix l = pca_loadings(r, 2);
  EXPECT_NEAR(l(0, 0), std::sqrt(1.5 / 2), 1e-14);
  EXPECT_NEAR(l(1, 0), std::sqrt(1.5 / 2), 1e-14);
  EXPECT_NEAR(std::abs(l(0, 1)), 0.5, 1e-14);
  EXPECT_NEAR(l(0, 1), -l(1, 1), 1e-14);
  EXPECT_GT(l(0, 1), 0.0);  // zero column sum: first largest entry positive
}

TEST(PcaLoadings, InvalidInput) {
  EXPECT_THROW(pca_loadings(Matrix::Identity(3, 3), 0), Error);
  EXPECT_THROW(pca_loadings(Matrix::Identity(3, 3), 4), Error);
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    pca_loadings(bad, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_correlation);
  }
}

TEST(PcaLoadings, SpectralProperties) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 3 + trial % 10;
    const Matrix x = test::random_matrix(40, m, rng) + test::random_matrix(40, 1, rng).replicate(1, m);
    const Matrix r = correlation_matrix(x);
    const Matrix full = pca_loadings(r, m);
    EXPECT_LE((full * full.transpose() - r).cwiseAbs().maxCoeff(), 1e-10);
    const Matrix gram = full.transpose() * full;
    EXPECT_LE((gram - Matrix(gram.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(gram.trace(), m, 1e-10);
    for (int j = 1; j < m; ++j) EXPECT_GE(gram(j - 1, j - 1), gram(j, j) - 1e-10);
    for (int j = 0; j < m; ++j) EXPECT_GE(full.col(j).sum(), -1e-12);
    const Matrix top = pca_loadings(r, 2);
    EXPECT_LE((top - full.leftCols(2)).cwiseAbs().maxCoeff(), 1e-12);
  }
}
