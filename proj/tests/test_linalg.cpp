#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qcert/errors.hpp"
#include "qcert/linalg.hpp"
#include "test_support.hpp"

namespace qcert {
namespace {

TEST(Linalg, JOneMode) {
  RealMatrix expected(2, 2);
  expected << 1, 0, 0, -1;
  EXPECT_EQ(build_J(1), expected);
}

TEST(Linalg, JTwoModes) {
  RealVector d(4);
  d << 1, 1, -1, -1;
  EXPECT_EQ(build_J(2), RealMatrix(d.asDiagonal()));
}

TEST(Linalg, SigmaOneMode) {
  RealMatrix expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(build_Sigma(1), expected);
}

TEST(Linalg, SigmaTwoModesSwapsBlocks) {
  const RealMatrix S = build_Sigma(2);
  RealMatrix expected = RealMatrix::Zero(4, 4);
  expected.topRightCorner(2, 2).setIdentity();
  expected.bottomLeftCorner(2, 2).setIdentity();
  EXPECT_EQ(S, expected);
}

TEST(Linalg, JSigmaAlgebraExhaustive) {
  for (int n = 1; n <= 8; ++n) {
    const RealMatrix J = build_J(n);
    const RealMatrix S = build_Sigma(n);
    const RealMatrix I = RealMatrix::Identity(2 * n, 2 * n);
    EXPECT_EQ(J * J, I) << n;
    EXPECT_EQ(S * S, I) << n;
    EXPECT_EQ(S, S.transpose()) << n;
    EXPECT_EQ(S * J, -J * S) << n;
    EXPECT_EQ(S * J * S, -J) << n;
  }
}

TEST(Linalg, FOfJosephsonPlant) {
  const auto d = testing::josephson_doubled();
  const ComplexMatrix F = build_F(d.M, d.N);
  const ComplexMatrix J = build_J(2).cast<Complex>();
  const ComplexMatrix expected = -kI * J * d.M - 8.0 * ComplexMatrix::Identity(4, 4);
  EXPECT_LT((F - expected).norm(), 1e-14);
}

TEST(Linalg, FZeroPlant) {
  EXPECT_EQ(build_F(ComplexMatrix::Zero(4, 4), ComplexMatrix::Zero(4, 4)), ComplexMatrix::Zero(4, 4));
}

TEST(Linalg, FPureDamping) {
  const ComplexMatrix F = build_F(ComplexMatrix::Zero(2, 2), ComplexMatrix::Identity(2, 2));
  EXPECT_LT((F + 0.5 * ComplexMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Linalg, FMatchesSecondCompositionOrder) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const int m = 1 + (trial / 3) % 3;
    const ComplexMatrix M = testing::random_hermitian(2 * n, rng);
    const ComplexMatrix N = testing::random_complex(2 * m, 2 * n, rng);
    const RealVector jn = build_J(n).diagonal();
    const RealVector jm = build_J(m).diagonal();
    ComplexMatrix F(2 * n, 2 * n);
    for (int r = 0; r < 2 * n; ++r)
      for (int c = 0; c < 2 * n; ++c) {
        Complex diss = 0.0;
        for (int k = 0; k < 2 * m; ++k) diss += std::conj(N(k, r)) * jm(k) * N(k, c);
        F(r, c) = -kI * jn(r) * M(r, c) - 0.5 * jn(r) * diss;
      }
    EXPECT_LT((build_F(M, N) - F).norm(), 1e-12);
  }
}

TEST(Linalg, FRejectsDimensionMismatch) {
  EXPECT_THROW(build_F(ComplexMatrix::Zero(4, 4), ComplexMatrix::Zero(2, 2)), ValidationError);
  EXPECT_THROW(build_F(ComplexMatrix::Zero(3, 3), ComplexMatrix::Zero(2, 3)), ValidationError);
}

TEST(Linalg, EmbeddingOfIdentity) {
  EXPECT_EQ(real_embedding(ComplexMatrix::Identity(2, 2)), RealMatrix::Identity(4, 4));
}

TEST(Linalg, EmbeddingOfPauliY) {
  ComplexMatrix A(2, 2);
  A << 0.0, -kI, kI, 0.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(real_embedding(A));
  RealVector expected(4);
  expected << -1, -1, 1, 1;
  EXPECT_LT((es.eigenvalues() - expected).norm(), 1e-14);
}

TEST(Linalg, EmbeddingSpectrumIsDoubled) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix A = testing::random_hermitian(5, rng);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> oracle(A);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(real_embedding(A));
    for (int i = 0; i < 5; ++i) {
      EXPECT_NEAR(es.eigenvalues()(2 * i), oracle.eigenvalues()(i), 1e-10);
      EXPECT_NEAR(es.eigenvalues()(2 * i + 1), oracle.eigenvalues()(i), 1e-10);
    }
  }
}

TEST(Linalg, EmbeddingIsMultiplicative) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix A = testing::random_hermitian(4, rng);
    const ComplexMatrix B = testing::random_hermitian(4, rng);
    const ComplexMatrix AB = A * B;
    RealMatrix R(8, 8);
    R << AB.real(), -AB.imag(), AB.imag(), AB.real();
    EXPECT_LT((R - real_embedding(A) * real_embedding(B)).norm(), 1e-12);
  }
}

TEST(Linalg, EmbeddingRoundTrip) {
  std::mt19937_64 rng(2);
  const ComplexMatrix A = testing::random_hermitian(4, rng);
  EXPECT_LT((complex_from_embedding(real_embedding(A)) - A).norm(), 1e-15);
}

TEST(Linalg, EmbeddingRejectsNonHermitian) {
  ComplexMatrix A(2, 2);
  A << 1, 2, 3, 4;
  EXPECT_THROW(real_embedding(A), ValidationError);
}

TEST(Linalg, LambdaMaxExamples) {
  RealVector d(2);
  d << 3, -1;
  EXPECT_NEAR(hermitian_lambda_max(d.asDiagonal().toDenseMatrix().cast<Complex>()), 3.0, 1e-12);
  ComplexMatrix A(2, 2);
  A << 2.0, Complex(1, 1), Complex(1, -1), 2.0;
  EXPECT_NEAR(hermitian_lambda_max(A), 2.0 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(hermitian_lambda_max(-ComplexMatrix::Identity(3, 3)), -1.0, 1e-14);
}

TEST(Linalg, LambdaMinAndEigenvaluesAscending) {
  ComplexMatrix A(2, 2);
  A << 2.0, Complex(1, 1), Complex(1, -1), 2.0;
  const RealVector ev = hermitian_eigenvalues(A);
  ASSERT_EQ(ev.size(), 2);
  EXPECT_NEAR(ev(0), 2.0 - std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(ev(1), 2.0 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(hermitian_lambda_min(A), 2.0 - std::sqrt(2.0), 1e-12);
}

TEST(Linalg, LambdaMaxRejectsNonHermitian) {
  ComplexMatrix A(2, 2);
  A << 0, 1, 0, 0;
  EXPECT_THROW(hermitian_lambda_max(A), ValidationError);
}

TEST(Linalg, NegativeDefinite) {
  EXPECT_TRUE(is_negative_definite(-ComplexMatrix::Identity(2, 2), 0.5));
  RealVector d(2);
  d << -1, 1e-12;
  EXPECT_FALSE(is_negative_definite(d.asDiagonal().toDenseMatrix().cast<Complex>(), 1e-6));
}

TEST(Linalg, DefaultMarginAndNorm) {
  ComplexMatrix A(2, 2);
  A << 1.0, -3.0, Complex(0, 4), 0.5;
  EXPECT_DOUBLE_EQ(norm_inf(A), 4.5);
  EXPECT_DOUBLE_EQ(default_margin(A), 4.5e-8);
  EXPECT_DOUBLE_EQ(default_margin(ComplexMatrix::Zero(2, 2)), 1e-8);
}

TEST(Linalg, SymmetryPredicates) {
  ComplexMatrix A(2, 2);
  A << 1.0, Complex(0, 2), Complex(0, 2), 3.0;
  EXPECT_TRUE(is_symmetric(A));
  EXPECT_FALSE(is_hermitian(A));
  EXPECT_TRUE(is_hermitian(A * A.adjoint()));
}

}  // namespace
}  // namespace qcert
