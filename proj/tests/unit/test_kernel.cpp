#include <gtest/gtest.h>

#include <cmath>

#include "driftx/error.hpp"
#include "driftx/kernel.hpp"
#include "oracles.hpp"

using namespace driftx;

namespace {

RowVector pt(double x, double y) {
  RowVector v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST(LaplaceKernel, AnalyticValues) {
  EXPECT_DOUBLE_EQ(laplace_kernel(pt(0, 0), pt(0, 0), 0.05), 1.0);
  EXPECT_NEAR(laplace_kernel(pt(0, 0), pt(0.05, 0), 0.05), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(laplace_kernel(pt(0, 0), pt(0.1, 0), 0.05), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(laplace_kernel(pt(0, 0), pt(0.1, 0), 0.05), 0.1353352832, 1e-10);
}

TEST(LaplaceKernel, RejectsBadInput) {
  RowVector three(3);
  three << 0, 0, 0;
  EXPECT_THROW(laplace_kernel(pt(0, 0), three, 0.5), Error);
  EXPECT_THROW(laplace_kernel(pt(0, 0), pt(NAN, 0), 0.5), Error);
  EXPECT_THROW(laplace_kernel(pt(0, 0), pt(1, 0), 0.0), Error);
  EXPECT_THROW(laplace_kernel(pt(0, 0), pt(1, 0), -1.0), Error);
  try {
    laplace_kernel(pt(0, 0), three, 0.5);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(LaplaceKernel, SymmetryBoundsAndMonotonicity) {
  const Matrix p = oracle::gaussian(40, 3, 11);
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.rows(); ++j) {
      const double kij = laplace_kernel(p.row(i), p.row(j), 0.7);
      EXPECT_EQ(kij, laplace_kernel(p.row(j), p.row(i), 0.7));
      EXPECT_GT(kij, 0.0);
      EXPECT_LE(kij, 1.0);
      if (i != j) EXPECT_LT(kij, 1.0);
    }
  }
  // Closer points get larger weights; larger temperatures raise every weight.
  const RowVector x = pt(0.3, -0.2);
  double prev = 2.0;
  for (double d : {0.0, 0.1, 0.5, 1.0, 3.0}) {
    const double k = laplace_kernel(x, x + pt(d, 0), 0.4);
    EXPECT_LT(k, prev);
    prev = k;
  }
  prev = 0.0;
  for (double tau : {0.05, 0.1, 0.5, 2.0}) {
    const double k = laplace_kernel(x, pt(1, 1), tau);
    EXPECT_GT(k, prev);
    prev = k;
  }
}

TEST(KernelMatrix, SmallCases) {
  const FeatureSet origin(Matrix::Zero(1, 2));
  EXPECT_EQ(kernel_matrix(origin, origin, 0.05)(0, 0), 1.0);
  Matrix b(2, 2);
  b << 0.05, 0, 0.1, 0;
  const Matrix k = kernel_matrix(origin, FeatureSet(b), 0.05);
  EXPECT_NEAR(k(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(k(0, 1), std::exp(-2.0), 1e-15);
}

TEST(KernelMatrix, MatchesPairwiseOracle) {
  const Matrix a = oracle::gaussian(5, 2, 3);
  const Matrix k = kernel_matrix(a, a, 0.5);
  for (Index i = 0; i < 5; ++i) {
    EXPECT_EQ(k(i, i), 1.0);
    for (Index j = 0; j < 5; ++j) {
      EXPECT_EQ(k(i, j), k(j, i));
      EXPECT_NEAR(k(i, j), oracle::laplace(a, i, a, j, 0.5), 1e-15);
    }
  }
  const Matrix big_a = oracle::gaussian(70, 4, 5);
  const Matrix big_b = oracle::gaussian(90, 4, 6);
  const Matrix kb = kernel_matrix(big_a, big_b, 1.3);
  for (Index i = 0; i < 70; ++i) {
    for (Index j = 0; j < 90; ++j) EXPECT_NEAR(kb(i, j), oracle::laplace(big_a, i, big_b, j, 1.3), 1e-15);
  }
}

TEST(KernelMatrix, DimensionMismatch) {
  EXPECT_THROW(kernel_matrix(Matrix::Zero(2, 2), Matrix::Zero(2, 3), 0.5), Error);
}

TEST(KernelParams, Validation) {
  KernelParams ok;
  EXPECT_NO_THROW(ok.validate());
  KernelParams bad_tau{{0.5, -1.0}, {1.0, 1.0}};
  EXPECT_THROW(bad_tau.validate(), Error);
  KernelParams mismatch{{0.5}, {1.0, 1.0}};
  EXPECT_THROW(mismatch.validate(), Error);
  KernelParams zero_weights{{0.5, 1.0}, {0.0, 0.0}};
  EXPECT_THROW(zero_weights.validate(), Error);
  KernelParams empty{{}, {}};
  EXPECT_THROW(empty.validate(), Error);
}

TEST(FeatureSetType, Invariants) {
  EXPECT_THROW(FeatureSet(Matrix(0, 2)), Error);
  EXPECT_THROW(FeatureSet(Matrix(2, 0)), Error);
  Matrix nan = Matrix::Zero(2, 2);
  nan(1, 1) = NAN;
  EXPECT_THROW(FeatureSet{nan}, Error);
  EXPECT_THROW(FeatureSet(Matrix::Zero(2, 2), std::vector<int>{0}), Error);
  EXPECT_THROW(FeatureSet(Matrix::Zero(2, 2), std::vector<int>{0, -1}), Error);
  EXPECT_THROW(FeatureSet(Matrix::Zero(2, 2), std::vector<int>{0, 3}, 2), Error);
  const FeatureSet fs(Matrix::Zero(3, 2), std::vector<int>{1, 0, 1});
  EXPECT_EQ(fs.num_classes(), 2);
  EXPECT_EQ(fs.indices_of_class(1), (std::vector<Index>{0, 2}));
}
