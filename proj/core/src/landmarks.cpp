#include "driftx/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "driftx/error.hpp"
#include "driftx/kernel.hpp"
#include "driftx/random.hpp"

namespace driftx {
namespace {

double squared_distance(const Matrix& a, Index i, const Matrix& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

void require_budget(Index budget, Index available, const std::string& where) {
  if (budget < 1) throw Error(ErrorCode::InvalidArgument, "landmark budget must be positive");
  if (budget > available) {
    throw Error(ErrorCode::Infeasible, "budget " + std::to_string(budget) + " exceeds the " +
                                           std::to_string(available) + " points available in " + where);
  }
}

// Runs `pick(points, budget, unit_index)` once globally or once per class and
// assembles the LandmarkSet with indices mapped back to `data`.
template <typename Pick>
LandmarkSet select_by_scope(const FeatureSet& data, Index budget, SelectionScope scope,
                            LandmarkStrategy strategy, Pick&& pick) {
  LandmarkSet out;
  out.strategy = strategy;
  out.scope = scope;
  std::vector<Index> chosen;
  if (scope == SelectionScope::Global) {
    require_budget(budget, data.size(), "the dataset");
    chosen = pick(data.points(), budget, std::uint64_t{0});
  } else {
    if (!data.has_labels()) {
      throw Error(ErrorCode::InvalidArgument, "per-class landmark selection needs labelled data");
    }
    for (int c = 0; c < data.num_classes(); ++c) {
      const auto members = data.indices_of_class(c);
      require_budget(budget, static_cast<Index>(members.size()), "class " + std::to_string(c));
      const FeatureSet slice = data.subset(members);
      for (Index local : pick(slice.points(), budget, static_cast<std::uint64_t>(c) + 1)) {
        chosen.push_back(members[static_cast<std::size_t>(local)]);
      }
    }
  }
  out.points.resize(static_cast<Index>(chosen.size()), data.dim());
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    out.points.row(static_cast<Index>(k)) = data.row(chosen[k]);
    if (data.has_labels()) out.classes.push_back(data.label(chosen[k]));
  }
  out.source_indices = std::move(chosen);
  return out;
}

// k-means++ style seeding: first centre uniform, then proportional to squared
// distance to the nearest chosen centre.
Matrix seed_centroids(const Matrix& points, Index k, Rng& rng) {
  const Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Index pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  for (Index c = 0; c < k; ++c) {
    centroids.row(c) = points.row(pick);
    used[static_cast<std::size_t>(pick)] = true;
    if (c + 1 == k) break;
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      auto& d = nearest[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centroids, c));
      total += d;
    }
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += nearest[static_cast<std::size_t>(i)];
        if (acc > target && nearest[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // All mass sits on chosen centres: fall back to an unused row.
      std::vector<Index> free;
      for (Index i = 0; i < n; ++i) {
        if (!used[static_cast<std::size_t>(i)]) free.push_back(i);
      }
      pick = free[static_cast<std::size_t>(rng.below(free.size()))];
    }
  }
  return centroids;
}

}  // namespace

std::string_view to_string(LandmarkStrategy strategy) {
  switch (strategy) {
    case LandmarkStrategy::Random: return "random";
    case LandmarkStrategy::KMeans: return "kmeans";
    case LandmarkStrategy::KCenter: return "kcenter";
    case LandmarkStrategy::FacilityLocation: return "facility";
  }
  return "unknown";
}

LandmarkStrategy parse_strategy(std::string_view name) {
  if (name == "random") return LandmarkStrategy::Random;
  if (name == "kmeans") return LandmarkStrategy::KMeans;
  if (name == "kcenter") return LandmarkStrategy::KCenter;
  if (name == "facility") return LandmarkStrategy::FacilityLocation;
  throw Error(ErrorCode::InvalidArgument, "unknown landmark strategy '" + std::string(name) + "'");
}

std::string_view to_string(SelectionScope scope) {
  return scope == SelectionScope::Global ? "global" : "per-class";
}

SelectionScope parse_scope(std::string_view name) {
  if (name == "global") return SelectionScope::Global;
  if (name == "per-class") return SelectionScope::PerClass;
  throw Error(ErrorCode::InvalidArgument, "unknown selection scope '" + std::string(name) + "'");
}

LandmarkSet LandmarkSet::of_class(int cls) const {
  LandmarkSet out;
  out.strategy = strategy;
  out.scope = scope;
  std::vector<Index> rows;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == cls) rows.push_back(static_cast<Index>(i));
  }
  out.points.resize(static_cast<Index>(rows.size()), dim());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.points.row(static_cast<Index>(k)) = points.row(rows[k]);
    out.source_indices.push_back(source_indices[static_cast<std::size_t>(rows[k])]);
    out.classes.push_back(cls);
  }
  return out;
}

void LandmarkSet::check_against(const FeatureSet& data) const {
  if (dim() != data.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "landmarks and data differ in dimension");
  }
  if (static_cast<Index>(source_indices.size()) != size()) {
    throw Error(ErrorCode::InvalidArgument, "one source index per landmark is required");
  }
  for (Index i = 0; i < size(); ++i) {
    const Index src = source_indices[static_cast<std::size_t>(i)];
    if (src < 0 || src >= data.size()) {
      throw Error(ErrorCode::InvalidArgument, "landmark source index " + std::to_string(src) + " out of range");
    }
    if (points.row(i) != data.row(src)) {
      throw Error(ErrorCode::InvalidArgument,
                  "landmark " + std::to_string(i) + " does not match data row " + std::to_string(src));
    }
  }
}

std::vector<Index> kmeans_medoids(const Matrix& points, Index budget, Seed seed, int max_iters) {
  const Index n = points.rows();
  require_budget(budget, n, "the selection pool");
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "k-means needs max_iters >= 1");
  Rng rng(seed);
  Matrix centroids = seed_centroids(points, budget, rng);
  std::vector<Index> assign(static_cast<std::size_t>(n), -1);

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double best_d = squared_distance(points, i, centroids, 0);
      for (Index c = 1; c < budget; ++c) {
        const double d = squared_distance(points, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(budget, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(budget), 0);
    for (Index i = 0; i < n; ++i) {
      const Index c = assign[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < budget; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it onto the point worst served by its own centroid.
      Index worst = 0;
      double worst_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double d = squared_distance(points, i, centroids, assign[static_cast<std::size_t>(i)]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      centroids.row(c) = points.row(worst);
      assign[static_cast<std::size_t>(worst)] = c;
    }
  }

  // Snap each centroid to its nearest unused data point.
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(budget));
  for (Index c = 0; c < budget; ++c) {
    Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double d = squared_distance(points, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.push_back(best);
  }
  return out;
}

std::vector<Index> kcenter_greedy(const Matrix& points, Index budget, Index first_index) {
  const Index n = points.rows();
  require_budget(budget, n, "the selection pool");
  if (first_index < 0 || first_index >= n) {
    throw Error(ErrorCode::InvalidArgument, "k-center start index out of range");
  }
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Index> out{first_index};
  used[static_cast<std::size_t>(first_index)] = true;
  while (static_cast<Index>(out.size()) < budget) {
    const Index last = out.back();
    Index best = -1;
    double best_d = -1.0;
    for (Index i = 0; i < n; ++i) {
      auto& d = nearest[static_cast<std::size_t>(i)];
      d = std::min(d, std::sqrt(squared_distance(points, i, points, last)));
      if (!used[static_cast<std::size_t>(i)] && d > best_d) {
        best_d = d;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.push_back(best);
  }
  return out;
}

std::vector<Index> facility_location_greedy(const Matrix& points, Index budget, double tau) {
  detail::require_positive_tau(tau);
  const Index n = points.rows();
  require_budget(budget, n, "the selection pool");
  const Matrix sim = kernel_matrix(points, points, tau);
  Vector cover = Vector::Zero(n);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(budget));
  for (Index step = 0; step < budget; ++step) {
    Index best = -1;
    double best_gain = -1.0;
    for (Index u = 0; u < n; ++u) {
      if (used[static_cast<std::size_t>(u)]) continue;
      double gain = 0.0;
      for (Index x = 0; x < n; ++x) gain += std::max(0.0, sim(x, u) - cover(x));
      if (gain > best_gain) {
        best_gain = gain;
        best = u;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.push_back(best);
    cover = cover.cwiseMax(sim.col(best));
  }
  return out;
}

double facility_objective(const Matrix& points, std::span<const Index> selected, double tau) {
  double total = 0.0;
  for (Index x = 0; x < points.rows(); ++x) {
    double best = 0.0;
    for (Index u : selected) {
      best = std::max(best, detail::laplace(points.row(x).data(), points.row(u).data(), points.cols(), tau));
    }
    total += best;
  }
  return total;
}

double covering_radius(const Matrix& points, std::span<const Index> selected) {
  double radius = 0.0;
  for (Index x = 0; x < points.rows(); ++x) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Index u : selected) nearest = std::min(nearest, std::sqrt(squared_distance(points, x, points, u)));
    radius = std::max(radius, nearest);
  }
  return radius;
}

LandmarkSet select_random(const FeatureSet& data, Index budget, SelectionScope scope, Seed seed) {
  const Rng root(seed);
  return select_by_scope(data, budget, scope, LandmarkStrategy::Random,
                         [&](const Matrix& pts, Index k, std::uint64_t unit) {
                           Rng rng = root.fork(unit);
                           return rng.sample_without_replacement(pts.rows(), k);
                         });
}

LandmarkSet select_kmeans(const FeatureSet& data, Index budget, SelectionScope scope, Seed seed,
                          int max_iters) {
  const Rng root(seed);
  return select_by_scope(data, budget, scope, LandmarkStrategy::KMeans,
                         [&](const Matrix& pts, Index k, std::uint64_t unit) {
                           Rng rng = root.fork(unit);
                           return kmeans_medoids(pts, k, Seed{rng.next_u64()}, max_iters);
                         });
}

LandmarkSet select_kcenter(const FeatureSet& data, Index budget, SelectionScope scope, Seed seed) {
  const Rng root(seed);
  return select_by_scope(data, budget, scope, LandmarkStrategy::KCenter,
                         [&](const Matrix& pts, Index k, std::uint64_t unit) {
                           Rng rng = root.fork(unit);
                           const auto first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(pts.rows())));
                           return kcenter_greedy(pts, k, first);
                         });
}

LandmarkSet select_facility_location(const FeatureSet& data, Index budget, SelectionScope scope,
                                     double tau) {
  return select_by_scope(data, budget, scope, LandmarkStrategy::FacilityLocation,
                         [&](const Matrix& pts, Index k, std::uint64_t) {
                           return facility_location_greedy(pts, k, tau);
                         });
}

LandmarkSet select_landmarks(LandmarkStrategy strategy, const FeatureSet& data, Index budget,
                             SelectionScope scope, const LandmarkOptions& options) {
  switch (strategy) {
    case LandmarkStrategy::Random: return select_random(data, budget, scope, options.seed);
    case LandmarkStrategy::KMeans:
      return select_kmeans(data, budget, scope, options.seed, options.kmeans_max_iters);
    case LandmarkStrategy::KCenter: return select_kcenter(data, budget, scope, options.seed);
    case LandmarkStrategy::FacilityLocation:
      return select_facility_location(data, budget, scope, options.facility_tau);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown landmark strategy");
}

}  // namespace driftx
