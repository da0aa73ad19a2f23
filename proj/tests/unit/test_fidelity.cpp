#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "driftx/error.hpp"
#include "driftx/fidelity.hpp"
#include "driftx/field.hpp"
#include "driftx/kernel.hpp"
#include "driftx/landmarks.hpp"
#include "driftx/nystrom.hpp"
#include "oracles.hpp"

using namespace driftx;

namespace {

constexpr double kTau = 0.5;

// Explicit-loop evaluation of the local bound quantities with epsilon = 0.
struct LocalOracle {
  double residual = 0.0;
  double mass = 0.0;
  double error = 0.0;
  double radius = 0.0;
};

LocalOracle local_oracle(const Matrix& q, Index b, const Matrix& y, const NystromBasis& basis) {
  const Index n = y.rows();
  const auto phi_q = oracle::features(basis.landmarks(), basis.transform(), q, b, kTau);
  double r2 = 0.0, mass = 0.0, mass_u = 0.0;
  RowVector num = RowVector::Zero(y.cols()), num_u = RowVector::Zero(y.cols());
  LocalOracle out;
  for (Index j = 0; j < n; ++j) {
    const double k = oracle::laplace(q, b, y, j, kTau);
    const auto phi_y = oracle::features(basis.landmarks(), basis.transform(), y, j, kTau);
    double ku = 0.0;
    for (std::size_t c = 0; c < phi_y.size(); ++c) ku += phi_q[c] * phi_y[c];
    r2 += (k - ku) * (k - ku);
    mass += k;
    mass_u += ku;
    num += k * y.row(j);
    num_u += ku * y.row(j);
    out.radius = std::max(out.radius, y.row(j).norm());
  }
  out.residual = std::sqrt(r2);
  out.mass = mass / static_cast<double>(n);
  out.error = (num_u / mass_u - num / mass).norm();
  return out;
}

Matrix jittered(const Matrix& y, Index count, std::uint64_t seed, double scale) {
  const Matrix noise = oracle::gaussian(count, y.cols(), seed, 0.1 * scale);
  Matrix q(count, y.cols());
  for (Index i = 0; i < count; ++i) q.row(i) = y.row(i % y.rows()) + noise.row(i);
  return q;
}

}  // namespace

TEST(FidelityMetrics, CosineExamples) {
  const Matrix v = oracle::gaussian(6, 3, 1);
  EXPECT_NEAR(cosine_fidelity(v, v), 1.0, 1e-15);
  EXPECT_NEAR(cosine_fidelity(v, -v), -1.0, 1e-15);
  Matrix a(3, 2), b(3, 2);
  a << 1, 0, 0, 2, 3, 4;
  b << 1, 1, 0, -1, 4, 3;
  const double expected = (1.0 / std::sqrt(2.0) + -1.0 + 24.0 / 25.0) / 3.0;
  EXPECT_NEAR(cosine_fidelity(a, b), expected, 1e-14);
  Matrix zero = a;
  zero.row(1).setZero();
  try {
    cosine_fidelity(a, zero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
  EXPECT_THROW(cosine_fidelity(a, Matrix::Ones(2, 2)), Error);
}

TEST(FidelityMetrics, RelativeL2Examples) {
  const Matrix v = oracle::gaussian(6, 3, 2);
  EXPECT_EQ(relative_l2_fidelity(v, v), 0.0);
  EXPECT_NEAR(relative_l2_fidelity(v, 2 * v), 1.0, 1e-15);
  const Matrix w = oracle::gaussian(6, 3, 3);
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    num += (w.data()[i] - v.data()[i]) * (w.data()[i] - v.data()[i]);
    den += v.data()[i] * v.data()[i];
  }
  EXPECT_NEAR(relative_l2_fidelity(v, w), std::sqrt(num / den), 1e-14);
  EXPECT_THROW(relative_l2_fidelity(Matrix::Zero(2, 2), v.topRows(2).leftCols(2)), Error);
}

TEST(FidelityMetrics, TargetMseExamples) {
  const Matrix v = oracle::gaussian(5, 2, 4);
  const Matrix x = oracle::gaussian(5, 2, 5);
  EXPECT_EQ(target_mse(x, v, v), 0.0);
  Matrix one_q = Matrix::Zero(1, 2), ve = Matrix::Zero(1, 2), vp(1, 2);
  vp << 3, 4;
  EXPECT_NEAR(target_mse(one_q, ve, vp), 12.5, 1e-15);
  const Matrix w = oracle::gaussian(5, 2, 6);
  EXPECT_NEAR(target_mse(x, v, w), (w - v).squaredNorm() / 10.0, 1e-14);
}

TEST(FidelityMetrics, MseRelativeL2Identity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix v = oracle::gaussian(8, 3, seed);
    const Matrix w = oracle::gaussian(8, 3, seed + 100);
    const Matrix x = oracle::gaussian(8, 3, seed + 200);
    const double rel = relative_l2_fidelity(v, w);
    const double mse = target_mse(x, v, w);
    EXPECT_NEAR(mse, rel * rel * v.squaredNorm() / 24.0, 1e-12 * mse);
  }
}

TEST(ProjectedKernelSource, MatchesBasisKernel) {
  const Matrix y = oracle::gaussian(15, 2, 1);
  const NystromBasis basis(y.topRows(5), kTau);
  const Matrix q = oracle::gaussian(4, 2, 2);
  const Matrix k = ProjectedKernelSource(basis).cross(q, FeatureSet(y));
  for (Index b = 0; b < 4; ++b) {
    for (Index j = 0; j < 15; ++j) EXPECT_NEAR(k(b, j), basis.projected_kernel(q.row(b), y.row(j)), 1e-14);
  }
}

TEST(ProjectedKernelSource, MultiShardNeedsLabels) {
  Matrix y = oracle::gaussian(20, 2, 3);
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(i % 2);
  const FeatureSet data(y, labels);
  const auto bank = build_bank(select_random(data, 3, SelectionScope::PerClass, Seed{1}), data, kTau, 1e-6, true);
  const Matrix k = ProjectedKernelSource(bank).cross(y.topRows(2), data);
  for (Index j = 0; j < 20; ++j) {
    const auto& basis = bank.shards()[*bank.shard_for_class(labels[static_cast<std::size_t>(j)])].basis;
    EXPECT_NEAR(k(0, j), basis.projected_kernel(y.row(0), y.row(j)), 1e-14);
  }
  EXPECT_THROW(ProjectedKernelSource(bank).cross(y.topRows(2), FeatureSet(y)), Error);
  std::vector<int> unseen = labels;
  unseen[0] = 5;
  EXPECT_THROW(ProjectedKernelSource(bank).cross(y.topRows(2), FeatureSet(y, unseen)), Error);
}

TEST(LocalBound, DiagnosticMatchesOracle) {
  const Matrix y = oracle::gaussian(30, 2, 7);
  const NystromBasis basis(y.topRows(6), kTau);
  const Matrix q = jittered(y, 10, 8, 1.0);
  const auto diags = verify_local_bounds(q, FeatureSet(y), ProjectedKernelSource(basis), kTau);
  for (Index b = 0; b < q.rows(); ++b) {
    const auto o = local_oracle(q, b, y, basis);
    const auto& d = diags[static_cast<std::size_t>(b)];
    EXPECT_NEAR(d.residual_norm, o.residual, 1e-12);
    EXPECT_NEAR(d.kernel_mass, o.mass, 1e-13);
    EXPECT_NEAR(d.actual_error, o.error, 1e-10);
    EXPECT_EQ(d.data_radius, o.radius);
    EXPECT_EQ(d.condition_holds, o.residual <= std::sqrt(30.0) * o.mass / 2);
    EXPECT_NEAR(d.bound_value, 4 * o.radius * o.residual / (std::sqrt(30.0) * o.mass), 1e-10);
  }
  const auto single = verify_local_bound(q.row(3), FeatureSet(y), ProjectedKernelSource(basis), kTau, 10.0);
  EXPECT_EQ(single.data_radius, 10.0);
}

TEST(LocalBound, FullRankLandmarks) {
  const Matrix y = oracle::gaussian(25, 2, 9);
  const NystromBasis basis(y, kTau, 1e-12);
  const Matrix q = jittered(y, 8, 10, 1.0);
  for (const auto& d : verify_local_bounds(q, FeatureSet(y), ProjectedKernelSource(basis), kTau)) {
    EXPECT_LE(d.residual_norm, 1e-5);
    EXPECT_TRUE(d.condition_holds);
    EXPECT_LE(d.actual_error, d.bound_value);
  }
}

TEST(LocalBound, FarLandmarkMakesNoClaim) {
  const Matrix y = oracle::gaussian(20, 2, 11, 0.3);
  Matrix far(1, 2);
  far << 50.0, 50.0;
  const NystromBasis basis(far, kTau);
  const auto d = verify_local_bound(y.row(0), FeatureSet(y), ProjectedKernelSource(basis), kTau);
  EXPECT_FALSE(d.condition_holds);
  EXPECT_TRUE(d.satisfied());
}

TEST(LocalBound, VanishingMassIsAnError) {
  const Matrix y = oracle::gaussian(5, 2, 12, 0.1);
  const NystromBasis basis(y, kTau);
  Matrix q(1, 2);
  q << 1e4, 1e4;
  try {
    verify_local_bounds(q, FeatureSet(y), ProjectedKernelSource(basis), kTau);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NumericalFailure);
  }
}

TEST(LocalBound, HoldsAcrossRandomInstances) {
  int instances = 0, premise = 0;
  for (Index n : {20, 50, 100}) {
    for (Index r : {2, 5, 10}) {
      for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const Matrix y = oracle::gaussian(n, 2, 1000 * static_cast<std::uint64_t>(n) + 10 * static_cast<std::uint64_t>(r) + seed);
        const LandmarkSet lm = select_random(FeatureSet(y), r, SelectionScope::Global, Seed{seed});
        const NystromBasis basis = build_basis(lm, kTau);
        const Matrix q = jittered(y, 5, seed + 77, 1.0);
        for (const auto& d : verify_local_bounds(q, FeatureSet(y), ProjectedKernelSource(basis), kTau)) {
          ++instances;
          if (!d.condition_holds) continue;
          ++premise;
          EXPECT_LE(d.actual_error, d.bound_value) << "n=" << n << " r=" << r << " seed=" << seed;
        }
      }
    }
  }
  EXPECT_GE(premise, 100) << "of " << instances;
}

TEST(OnSupportBound, FullRankIsTrivial) {
  const Matrix y = oracle::gaussian(30, 2, 13);
  const NystromBasis basis(y, kTau, 1e-12);
  const OnSupportCheck c = verify_on_support_bound(FeatureSet(y), ProjectedKernelSource(basis), kTau);
  EXPECT_TRUE(c.condition_holds);
  EXPECT_LE(c.lhs, 1e-10);
  EXPECT_LE(c.rhs, 1e-8);
  EXPECT_TRUE(c.satisfied());
}

TEST(OnSupportBound, MatchesOracleAndHolds) {
  int premise = 0;
  // The premise needs the support to be compact on the kernel scale.
  for (std::uint64_t seed = 0; seed < 90; ++seed) {
    const Matrix y = oracle::gaussian(40, 2, 500 + seed, 0.25);
    const LandmarkSet lm = select_random(FeatureSet(y), 16 + static_cast<Index>(seed % 3) * 8, SelectionScope::Global,
                                         Seed{seed});
    const NystromBasis basis = build_basis(lm, kTau);
    const OnSupportCheck c = verify_on_support_bound(FeatureSet(y), ProjectedKernelSource(basis), kTau);
    const Matrix k = kernel_matrix(y, y, kTau);
    const Matrix ku = basis.projected_gram(y);
    double kappa = INFINITY, lhs = 0.0;
    for (Index i = 0; i < 40; ++i) {
      kappa = std::min(kappa, k.row(i).sum() / 40.0);
      const RowVector exact = k.row(i) * y / k.row(i).sum();
      const RowVector proj = ku.row(i) * y / ku.row(i).sum();
      lhs += (proj - exact).squaredNorm() / 40.0;
    }
    EXPECT_NEAR(c.kappa_min, kappa, 1e-14);
    EXPECT_NEAR(c.gram_error_fro, (k - ku).norm(), 1e-12);
    EXPECT_NEAR(c.gram_error_2inf, (k - ku).rowwise().norm().maxCoeff(), 1e-12);
    EXPECT_NEAR(c.lhs, lhs, 1e-10 * std::max(1.0, lhs));
    const double radius = y.rowwise().norm().maxCoeff();
    EXPECT_NEAR(c.rhs, 16 * radius * radius * (k - ku).squaredNorm() / (1600.0 * kappa * kappa), 1e-9 * c.rhs);
    if (c.condition_holds) {
      ++premise;
      EXPECT_LE(c.lhs, c.rhs) << seed;
    }
  }
  EXPECT_GE(premise, 50);
}

TEST(OnSupportBound, GramErrorShrinksOnNestedLandmarks) {
  const Matrix y = oracle::gaussian(40, 2, 17);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LandmarkSet all = select_random(FeatureSet(y), 40, SelectionScope::Global, Seed{seed});
    double prev = INFINITY;
    for (Index r : {5, 10, 20, 40}) {
      const NystromBasis basis(all.points.topRows(r), kTau, 1e-10);
      const double err = gram_error_fro(FeatureSet(y), ProjectedKernelSource(basis), kTau);
      EXPECT_LE(err, prev + 1e-9);
      prev = err;
    }
  }
}

TEST(FidelityReport, AgreesWithComponents) {
  const Matrix y = oracle::gaussian(50, 2, 19);
  const FeatureSet positives(y);
  const LandmarkSet lm = select_random(positives, 15, SelectionScope::Global, Seed{3});
  const auto bank = build_bank(lm, positives, kTau, kDefaultLambda, false);
  const FeatureSet q(jittered(y, 12, 20, 1.0));
  const FidelityReport rep = fidelity_report(q, positives, bank, kTau);
  const Matrix ve = oracle::kernel_mean(q.points(), y, kTau, bank.epsilon()) - q.points();
  const Matrix vp = projected_mean(compose_shards_batch(bank, q.points()), bank.epsilon()) - q.points();
  EXPECT_NEAR(rep.cosine_similarity, cosine_fidelity(ve, vp), 1e-12);
  EXPECT_NEAR(rep.relative_l2_error, relative_l2_fidelity(ve, vp), 1e-10);
  EXPECT_NEAR(rep.target_mse, target_mse(q.points(), ve, vp), 1e-12);
  ASSERT_EQ(rep.per_query.size(), 12u);
  std::size_t holds = 0, ok = 0;
  for (const auto& d : rep.per_query) {
    holds += d.condition_holds ? 1 : 0;
    ok += d.condition_holds && d.satisfied() ? 1 : 0;
  }
  EXPECT_EQ(rep.premise_holds, holds);
  EXPECT_EQ(rep.bound_satisfied, ok);
  EXPECT_EQ(rep.bound_violated, holds - ok);
  EXPECT_EQ(rep.bound_violated, 0u);
}
