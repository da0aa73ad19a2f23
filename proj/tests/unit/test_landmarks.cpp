#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "driftx/error.hpp"
#include "driftx/landmarks.hpp"
#include "oracles.hpp"

using namespace driftx;

namespace {

Matrix line(std::initializer_list<double> xs) {
  Matrix m(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

FeatureSet two_classes(Index per_class, std::uint64_t seed) {
  Matrix pts = oracle::gaussian(2 * per_class, 2, seed);
  std::vector<int> labels;
  for (Index i = 0; i < 2 * per_class; ++i) labels.push_back(static_cast<int>(i % 2));
  return FeatureSet(pts, labels);
}

std::vector<double> sorted_values(const LandmarkSet& lm) {
  std::vector<double> v(lm.points.data(), lm.points.data() + lm.points.size());
  std::sort(v.begin(), v.end());
  return v;
}

const LandmarkStrategy kAll[] = {LandmarkStrategy::Random, LandmarkStrategy::KMeans, LandmarkStrategy::KCenter,
                                 LandmarkStrategy::FacilityLocation};

}  // namespace

TEST(SelectRandom, ExhaustiveBudget) {
  const FeatureSet data(oracle::gaussian(5, 2, 1));
  const LandmarkSet lm = select_random(data, 5, SelectionScope::Global, Seed{3});
  std::set<Index> idx(lm.source_indices.begin(), lm.source_indices.end());
  EXPECT_EQ(idx, (std::set<Index>{0, 1, 2, 3, 4}));
}

TEST(SelectRandom, PerClassCounts) {
  const FeatureSet data = two_classes(10, 2);
  const LandmarkSet lm = select_random(data, 3, SelectionScope::PerClass, Seed{4});
  ASSERT_EQ(lm.size(), 6);
  EXPECT_EQ(std::count(lm.classes.begin(), lm.classes.end(), 0), 3);
  EXPECT_EQ(std::count(lm.classes.begin(), lm.classes.end(), 1), 3);
  for (std::size_t k = 0; k < lm.classes.size(); ++k) EXPECT_EQ(data.label(lm.source_indices[k]), lm.classes[k]);
}

TEST(SelectRandom, Deterministic) {
  const FeatureSet data(oracle::gaussian(100, 2, 1));
  EXPECT_EQ(select_random(data, 10, SelectionScope::Global, Seed{9}).source_indices,
            select_random(data, 10, SelectionScope::Global, Seed{9}).source_indices);
}

TEST(SelectRandom, InfeasibleBudgetNamesTheClass) {
  Matrix pts = oracle::gaussian(7, 2, 1);
  const FeatureSet data(pts, std::vector<int>{0, 0, 0, 0, 0, 1, 1});
  try {
    select_random(data, 3, SelectionScope::PerClass, Seed{1});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
    EXPECT_NE(std::string(e.what()).find("class 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(select_random(FeatureSet(pts), 8, SelectionScope::Global, Seed{1}), Error);
  EXPECT_THROW(select_random(FeatureSet(pts), 0, SelectionScope::Global, Seed{1}), Error);
  EXPECT_THROW(select_random(FeatureSet(pts), 2, SelectionScope::PerClass, Seed{1}), Error);
}

TEST(SelectKMeans, SeparatedPairs) {
  const FeatureSet data(line({0, 0, 10, 10}));
  const LandmarkSet lm = select_kmeans(data, 2, SelectionScope::Global, Seed{1});
  EXPECT_EQ(sorted_values(lm), (std::vector<double>{0, 10}));
}

TEST(SelectKMeans, RepeatedPoint) {
  const FeatureSet data(line({2.5, 2.5, 2.5, 2.5}));
  const LandmarkSet lm = select_kmeans(data, 1, SelectionScope::Global, Seed{1});
  EXPECT_EQ(lm.points(0, 0), 2.5);
}

TEST(SelectKMeans, DuplicatesAreRefilled) {
  // Three identical points and budget 3: snapping gives distinct source rows.
  const FeatureSet data(line({1, 1, 1, 5}));
  const LandmarkSet lm = select_kmeans(data, 3, SelectionScope::Global, Seed{2});
  std::set<Index> idx(lm.source_indices.begin(), lm.source_indices.end());
  EXPECT_EQ(idx.size(), 3u);
}

TEST(SelectKMeans, TwoBlobsNearBruteForceOptimum) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Matrix pts = oracle::gaussian(20, 2, 100 + seed, 0.1);
    for (Index i = 10; i < 20; ++i) pts.row(i).array() += 5.0;
    const FeatureSet data(pts);
    const LandmarkSet lm = select_kmeans(data, 2, SelectionScope::Global, Seed{seed});
    double best = INFINITY;
    for (const auto& s : oracle::subsets(20, 2)) best = std::min(best, oracle::kmeans_cost(pts, s));
    const double got = oracle::kmeans_cost(pts, lm.source_indices);
    EXPECT_LE(got, 1.05 * best);
    EXPECT_NE(lm.source_indices[0] < 10, lm.source_indices[1] < 10);
  }
}

TEST(SelectKCenter, HandExecutedGreedy) {
  EXPECT_EQ(kcenter_greedy(line({0, 1, 10}), 2, 0), (std::vector<Index>{0, 2}));
  const Matrix pts = line({0, 1, 10});
  EXPECT_EQ(kcenter_greedy(pts, 3, 1).size(), 3u);
}

TEST(SelectKCenter, SquareCornersPickTheOppositeCorner) {
  Matrix sq(4, 2);
  sq << 0, 0, 1, 0, 1, 1, 0, 1;
  for (Index first = 0; first < 4; ++first) {
    const auto picks = kcenter_greedy(sq, 2, first);
    EXPECT_EQ(picks[1], (first + 2) % 4);
  }
}

TEST(SelectKCenter, TiesGoToLowestIndex) {
  EXPECT_EQ(kcenter_greedy(line({0, -1, 1}), 2, 0), (std::vector<Index>{0, 1}));
}

TEST(SelectKCenter, ExhaustiveBudget) {
  const FeatureSet data(oracle::gaussian(6, 2, 3));
  const LandmarkSet lm = select_kcenter(data, 6, SelectionScope::Global, Seed{1});
  std::set<Index> idx(lm.source_indices.begin(), lm.source_indices.end());
  EXPECT_EQ(idx.size(), 6u);
}

TEST(SelectFacility, CenterMaximizesCoverage) {
  const Matrix pts = line({0, 5, 10});
  EXPECT_EQ(facility_location_greedy(pts, 1, 5.0), (std::vector<Index>{1}));
  double best = -1;
  Index arg = -1;
  for (Index c = 0; c < 3; ++c) {
    const double f = oracle::facility(pts, {c}, 5.0);
    if (f > best) {
      best = f;
      arg = c;
    }
  }
  EXPECT_EQ(arg, 1);
}

TEST(SelectFacility, FullBudgetCoversEverything) {
  const Matrix pts = oracle::gaussian(9, 2, 5);
  const auto all = facility_location_greedy(pts, 9, 0.5);
  EXPECT_NEAR(facility_objective(pts, all, 0.5), 9.0, 1e-12);
}

TEST(SelectFacility, TwoClustersOnePerCluster) {
  Matrix pts = oracle::gaussian(12, 2, 8, 0.2);
  for (Index i = 6; i < 12; ++i) pts.row(i).array() += 8.0;
  const auto picks = facility_location_greedy(pts, 2, 0.5);
  EXPECT_NE(picks[0] < 6, picks[1] < 6);
  double best = 0;
  for (const auto& s : oracle::subsets(12, 2)) best = std::max(best, oracle::facility(pts, s, 0.5));
  EXPECT_GE(oracle::facility(pts, picks, 0.5), (1.0 - 1.0 / std::exp(1.0)) * best);
}

TEST(LandmarkProperties, SubsetAndDeterminism) {
  const FeatureSet data = two_classes(15, 12);
  for (auto strategy : kAll) {
    for (auto scope : {SelectionScope::Global, SelectionScope::PerClass}) {
      LandmarkOptions opt;
      opt.seed = Seed{77};
      const LandmarkSet a = select_landmarks(strategy, data, 4, scope, opt);
      const LandmarkSet b = select_landmarks(strategy, data, 4, scope, opt);
      EXPECT_EQ(a.source_indices, b.source_indices) << to_string(strategy);
      EXPECT_EQ(a.points, b.points);
      EXPECT_NO_THROW(a.check_against(data));
      std::set<Index> uniq(a.source_indices.begin(), a.source_indices.end());
      EXPECT_EQ(uniq.size(), a.source_indices.size());
      for (Index i = 0; i < a.size(); ++i) {
        for (Index k = 0; k < data.dim(); ++k) {
          EXPECT_EQ(a.points(i, k), data.points()(a.source_indices[static_cast<std::size_t>(i)], k));
        }
      }
    }
  }
}

TEST(LandmarkProperties, FacilityGreedyWithinSubmodularFactor) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index n = 6 + static_cast<Index>(seed % 7);
    const Matrix pts = oracle::gaussian(n, 2, 500 + seed);
    for (Index k = 1; k <= 3; ++k) {
      const auto picks = facility_location_greedy(pts, k, 0.5);
      double best = 0;
      for (const auto& s : oracle::subsets(n, k)) best = std::max(best, oracle::facility(pts, s, 0.5));
      EXPECT_GE(oracle::facility(pts, picks, 0.5), (1.0 - 1.0 / std::exp(1.0)) * best - 1e-12);
      EXPECT_NEAR(facility_objective(pts, picks, 0.5), oracle::facility(pts, picks, 0.5), 1e-12);
    }
  }
}

TEST(LandmarkProperties, KCenterWithinTwiceOptimalRadius) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index n = 6 + static_cast<Index>(seed % 7);
    const FeatureSet data(oracle::gaussian(n, 2, 900 + seed));
    for (Index k = 1; k <= 3; ++k) {
      const LandmarkSet lm = select_kcenter(data, k, SelectionScope::Global, Seed{seed});
      double best = INFINITY;
      for (const auto& s : oracle::subsets(n, k)) best = std::min(best, oracle::cover_radius(data.points(), s));
      const double got = oracle::cover_radius(data.points(), lm.source_indices);
      EXPECT_LE(got, 2.0 * best + 1e-12);
      EXPECT_NEAR(covering_radius(data.points(), lm.source_indices), got, 1e-12);
    }
  }
}

TEST(LandmarkSetType, CheckAgainstCatchesMismatch) {
  const FeatureSet data(oracle::gaussian(5, 2, 1));
  LandmarkSet lm = select_random(data, 2, SelectionScope::Global, Seed{1});
  lm.points(0, 0) += 1e-9;
  EXPECT_THROW(lm.check_against(data), Error);
}

TEST(LandmarkEnums, ParseRoundTrip) {
  for (auto s : kAll) EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_EQ(parse_scope("per-class"), SelectionScope::PerClass);
  EXPECT_THROW(parse_strategy("weighted-kcenter"), Error);
}
