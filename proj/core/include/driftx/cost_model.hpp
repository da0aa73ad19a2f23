#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "driftx/types.hpp"

namespace driftx {

enum class CostMode { Exact, Projected, ProjectedSharded };

std::string_view to_string(CostMode mode);

struct CostModel {
  Index batch = 1;  // B
  Index n_plus = 1;
  Index n_minus = 1;
  Index dim = 1;
  Index rank = 1;  // r, the total over shards
  std::vector<Index> shard_sizes;  // r_s, sharded mode only
  CostMode mode = CostMode::Exact;

  /// Throws unless every size is >= 1 and, in sharded mode, sum r_s == r.
  void validate() const;
};

/// Leading-order unit operations per field evaluation (one kernel evaluation
/// costs D, one multiply-add costs 1):
///   exact      B N+ D + B N- D
///   projected  B (r D + r^2) + B N- D
///   sharded    B (r D + sum_s r_s^2) + B N- D
std::uint64_t predict_cost(const CostModel& model);

/// Bytes of the buffers a field evaluation holds at its peak, 8 per real:
///   projected  r D + r^2 + B r + B N-
///   sharded    r D + sum_s r_s^2 + max_s B r_s + B N-
///   exact      B N- (attraction is accumulated without a B x N+ buffer)
std::uint64_t account_memory(const CostModel& model);

struct TimingStats {
  std::int64_t median_ns = 0;
  std::int64_t p10_ns = 0;
  std::int64_t p90_ns = 0;
};

/// Nearest-rank order statistics of the samples.
TimingStats summarize_timings(std::vector<std::int64_t> samples);

struct BenchOptions {
  int repeats = 5;
  int warmups = 2;
  double tau = 0.5;
  /// Timed regions run on one thread unless this is set.
  bool multithreaded = false;
};

struct BenchReport {
  CostModel model;
  std::uint64_t predicted_unit_ops = 0;
  TimingStats total;  // full drift field
  TimingStats attraction;  // attractive mean only
  /// Peak bytes recorded by the instrumented field buffers.
  std::uint64_t peak_summary_bytes = 0;
  int repeats = 0;
  int warmups = 0;
  bool multithreaded = false;
};

/// Synthesizes standard normal data at the model's sizes, builds summaries
/// offline (untimed) for the projected modes, then times the attraction and
/// the full field. Sharded mode splits positives round-robin into one class
/// per shard with r_s landmarks each. Repulsion is self-masked over the
/// queries when N- == B and uses a separate random set otherwise.
/// Allocation failure is reported as ErrorCode::OutOfMemory.
BenchReport measure_field_cost(const CostModel& model, Seed seed, const BenchOptions& options = {});

}  // namespace driftx
