#pragma once

#include <string_view>
#include <vector>

#include "driftx/types.hpp"

namespace driftx {

enum class LandmarkStrategy { Random, KMeans, KCenter, FacilityLocation };
enum class SelectionScope { Global, PerClass };

std::string_view to_string(LandmarkStrategy strategy);
LandmarkStrategy parse_strategy(std::string_view name);
std::string_view to_string(SelectionScope scope);
SelectionScope parse_scope(std::string_view name);

/// A subset of training rows. points.row(i) is bit-identical to
/// data.row(source_indices[i]); classes[i] is that row's label when the source
/// data is labelled (empty otherwise).
struct LandmarkSet {
  Matrix points;
  std::vector<Index> source_indices;
  std::vector<int> classes;
  LandmarkStrategy strategy = LandmarkStrategy::Random;
  SelectionScope scope = SelectionScope::Global;

  Index size() const noexcept { return points.rows(); }
  Index dim() const noexcept { return points.cols(); }
  /// Landmarks whose class equals cls, in selection order.
  LandmarkSet of_class(int cls) const;
  /// Throws unless every landmark matches the data row it claims to come from.
  void check_against(const FeatureSet& data) const;
};

struct LandmarkOptions {
  Seed seed{};
  int kmeans_max_iters = 100;
  double facility_tau = 0.5;
};

// In PerClass scope `budget` is the number of landmarks per class and every
// class in [0, num_classes) must hold at least `budget` points.

LandmarkSet select_random(const FeatureSet& data, Index budget, SelectionScope scope, Seed seed);
LandmarkSet select_kmeans(const FeatureSet& data, Index budget, SelectionScope scope, Seed seed,
                          int max_iters = 100);
LandmarkSet select_kcenter(const FeatureSet& data, Index budget, SelectionScope scope, Seed seed);
LandmarkSet select_facility_location(const FeatureSet& data, Index budget, SelectionScope scope,
                                     double tau);

LandmarkSet select_landmarks(LandmarkStrategy strategy, const FeatureSet& data, Index budget,
                             SelectionScope scope, const LandmarkOptions& options);

// Single-pool building blocks. They return row indices into `points`.

/// Lloyd iterations followed by nearest-point snapping with deduplication.
std::vector<Index> kmeans_medoids(const Matrix& points, Index budget, Seed seed, int max_iters);
/// Greedy farthest-point traversal starting at first_index; ties go to the lowest index.
std::vector<Index> kcenter_greedy(const Matrix& points, Index budget, Index first_index);
/// Greedy facility location with s(x,u) = exp(-||x-u||/tau) over candidates = evaluation set = points.
std::vector<Index> facility_location_greedy(const Matrix& points, Index budget, double tau);

/// Facility-location objective F(S) = sum_x max_{u in S} s(x, u).
double facility_objective(const Matrix& points, std::span<const Index> selected, double tau);
/// max_x min_{u in S} ||x - u||.
double covering_radius(const Matrix& points, std::span<const Index> selected);

}  // namespace driftx
