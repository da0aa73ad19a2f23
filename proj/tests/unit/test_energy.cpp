#include <gtest/gtest.h>

#include "driftx/energy.hpp"
#include "driftx/error.hpp"
#include "oracles.hpp"

using namespace driftx;

TEST(EnergyDistance, IdenticalSetsGiveZero) {
  const Matrix a = oracle::gaussian(40, 2, 1);
  EXPECT_LE(std::abs(energy_distance(a, a)), 1e-12);
  Matrix shuffled = a.colwise().reverse();
  EXPECT_LE(std::abs(energy_distance(a, shuffled)), 1e-12);
}

TEST(EnergyDistance, SinglePoints) {
  Matrix a(1, 1), b(1, 1);
  a << 0.0;
  b << 3.5;
  EXPECT_NEAR(energy_distance(a, b), 7.0, 1e-15);
}

TEST(EnergyDistance, MatchesPairwiseOracle) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Matrix a = oracle::gaussian(50, 2, seed);
    const Matrix b = oracle::gaussian(50, 2, seed + 10, 1.5);
    EXPECT_NEAR(energy_distance(a, b), oracle::energy(a, b), 1e-12);
    EXPECT_NEAR(energy_distance(FeatureSet(a), FeatureSet(b)), oracle::energy(a, b), 1e-12);
    EXPECT_GE(energy_distance(a, b), -1e-12);
  }
  const Matrix c = oracle::gaussian(17, 3, 4);
  const Matrix d = oracle::gaussian(29, 3, 5);
  EXPECT_NEAR(energy_distance(c, d), oracle::energy(c, d), 1e-12);
}

TEST(EnergyDistance, RejectsMismatch) {
  EXPECT_THROW(energy_distance(oracle::gaussian(3, 2, 1), oracle::gaussian(3, 3, 1)), Error);
  EXPECT_THROW(energy_distance(Matrix(0, 2), oracle::gaussian(3, 2, 1)), Error);
}
