#include "driftx/cost_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <new>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "driftx/error.hpp"
#include "driftx/field.hpp"
#include "driftx/landmarks.hpp"
#include "driftx/nystrom.hpp"
#include "driftx/parallel.hpp"
#include "driftx/random.hpp"

namespace driftx {
namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t u(Index v) { return static_cast<std::uint64_t>(v); }

std::vector<Index> effective_shards(const CostModel& model) {
  if (model.mode == CostMode::ProjectedSharded) return model.shard_sizes;
  return {model.rank};
}

template <typename F>
std::int64_t time_ns(F&& body) {
  const auto start = Clock::now();
  body();
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

std::string sizes(const CostModel& m) {
  return fmt::format("B={} N+={} N-={} D={} r={}", m.batch, m.n_plus, m.n_minus, m.dim, m.rank);
}

ShardedSummaryBank synth_bank(const CostModel& model, const FeatureSet& positives, Rng& rng, double tau) {
  std::vector<SummaryShard> shards;
  const auto ranks = effective_shards(model);
  const auto count = static_cast<Index>(ranks.size());
  for (Index s = 0; s < count; ++s) {
    std::vector<Index> members;
    for (Index i = s; i < positives.size(); i += count) members.push_back(i);
    const Index r = ranks[static_cast<std::size_t>(s)];
    if (r > static_cast<Index>(members.size())) {
      throw Error(ErrorCode::Infeasible, fmt::format("shard {} needs {} landmarks but holds {} points", s, r,
                                                     members.size()));
    }
    const FeatureSet shard_points = positives.subset(members);
    const auto picks = rng.sample_without_replacement(shard_points.size(), r);
    Matrix landmarks(r, model.dim);
    for (Index k = 0; k < r; ++k) landmarks.row(k) = shard_points.row(picks[static_cast<std::size_t>(k)]);
    NystromBasis basis(std::move(landmarks), tau);
    const std::optional<int> cls =
        model.mode == CostMode::ProjectedSharded ? std::optional<int>(static_cast<int>(s)) : std::nullopt;
    AttractiveSummary summary = build_summary(basis, shard_points, cls);
    shards.push_back({std::move(basis), std::move(summary)});
  }
  return ShardedSummaryBank(std::move(shards));
}

}  // namespace

std::string_view to_string(CostMode mode) {
  switch (mode) {
    case CostMode::Exact: return "exact";
    case CostMode::Projected: return "projected";
    case CostMode::ProjectedSharded: return "sharded";
  }
  return "?";
}

void CostModel::validate() const {
  if (batch < 1 || n_plus < 1 || n_minus < 1 || dim < 1 || rank < 1) {
    throw Error(ErrorCode::InvalidArgument, "cost model sizes must be >= 1 (" + sizes(*this) + ")");
  }
  if (mode == CostMode::ProjectedSharded) {
    if (shard_sizes.empty()) throw Error(ErrorCode::InvalidArgument, "sharded cost model needs shard sizes");
    if (std::any_of(shard_sizes.begin(), shard_sizes.end(), [](Index r) { return r < 1; })) {
      throw Error(ErrorCode::InvalidArgument, "shard sizes must be >= 1");
    }
    if (std::accumulate(shard_sizes.begin(), shard_sizes.end(), Index{0}) != rank) {
      throw Error(ErrorCode::InvalidArgument, "shard sizes must sum to r");
    }
  }
}

std::uint64_t predict_cost(const CostModel& m) {
  m.validate();
  const std::uint64_t repulsion = u(m.batch) * u(m.n_minus) * u(m.dim);
  if (m.mode == CostMode::Exact) return u(m.batch) * u(m.n_plus) * u(m.dim) + repulsion;
  std::uint64_t quadratic = 0;
  for (Index r : effective_shards(m)) quadratic += u(r) * u(r);
  return u(m.batch) * (u(m.rank) * u(m.dim) + quadratic) + repulsion;
}

std::uint64_t account_memory(const CostModel& m) {
  m.validate();
  const std::uint64_t repulsion = u(m.batch) * u(m.n_minus);
  if (m.mode == CostMode::Exact) return 8 * repulsion;
  std::uint64_t quadratic = 0;
  Index widest = 0;
  for (Index r : effective_shards(m)) {
    quadratic += u(r) * u(r);
    widest = std::max(widest, r);
  }
  return 8 * (u(m.rank) * u(m.dim) + quadratic + u(m.batch) * u(widest) + repulsion);
}

TimingStats summarize_timings(std::vector<std::int64_t> samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no timing samples");
  std::sort(samples.begin(), samples.end());
  const auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::lround(q * static_cast<double>(samples.size() - 1)));
    return samples[idx];
  };
  return {at(0.5), at(0.1), at(0.9)};
}

BenchReport measure_field_cost(const CostModel& model, Seed seed, const BenchOptions& options) {
  model.validate();
  if (options.repeats < 5) throw Error(ErrorCode::InvalidArgument, "at least 5 timed repeats are required");
  if (options.warmups < 2) throw Error(ErrorCode::InvalidArgument, "at least 2 warmups are required");
  try {
    Rng root(seed);
    Rng data_rng = root.fork(1);
    Rng landmark_rng = root.fork(2);
    const FeatureSet positives(data_rng.normal_matrix(model.n_plus, model.dim));
    const FeatureSet queries(data_rng.normal_matrix(model.batch, model.dim));
    const bool self_masked = model.n_minus == model.batch;
    std::optional<FeatureSet> separate_negatives;
    if (!self_masked) separate_negatives.emplace(data_rng.normal_matrix(model.n_minus, model.dim));
    const FeatureSet& negatives = self_masked ? queries : *separate_negatives;

    DriftFieldConfig config;
    config.kernel.temperatures = {options.tau};
    config.attraction = model.mode == CostMode::Exact ? Estimator::Exact : Estimator::Projected;
    std::vector<ShardedSummaryBank> banks;
    if (config.attraction == Estimator::Projected) {
      banks.push_back(synth_bank(model, positives, landmark_rng, options.tau));
    }

    FieldInputs inputs;
    inputs.positives = &positives;
    inputs.banks = banks;
    inputs.negatives = &negatives;
    inputs.mask_self = self_masked;

    std::optional<ScopedThreadLimit> single;
    if (!options.multithreaded) single.emplace(1);

    Matrix sink;
    const auto attract = [&] {
      if (config.attraction == Estimator::Exact) {
        sink = exact_attractive_mean(queries, positives, options.tau, config.epsilon);
      } else {
        sink = projected_mean(compose_shards_batch(banks.front(), queries.points()), config.epsilon);
      }
    };
    MemoryLedger ledger;
    const auto total = [&] {
      inputs.ledger = &ledger;
      sink = drift_field(queries, inputs, config).drift;
    };

    for (int w = 0; w < options.warmups; ++w) {
      attract();
      total();
    }
    std::vector<std::int64_t> attract_ns;
    std::vector<std::int64_t> total_ns;
    for (int k = 0; k < options.repeats; ++k) {
      attract_ns.push_back(time_ns(attract));
      total_ns.push_back(time_ns(total));
    }

    BenchReport report;
    report.model = model;
    report.predicted_unit_ops = predict_cost(model);
    report.total = summarize_timings(std::move(total_ns));
    report.attraction = summarize_timings(std::move(attract_ns));
    report.peak_summary_bytes = ledger.peak_bytes();
    report.repeats = options.repeats;
    report.warmups = options.warmups;
    report.multithreaded = options.multithreaded;
    return report;
  } catch (const std::bad_alloc&) {
    throw Error(ErrorCode::OutOfMemory, "allocation failed for " + sizes(model));
  }
}

}  // namespace driftx
