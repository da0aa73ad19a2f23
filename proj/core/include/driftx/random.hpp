#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "driftx/types.hpp"

namespace driftx {

/// Deterministic random source: xoshiro256** seeded through splitmix64.
///
/// Every draw (uniform, normal, index, permutation) is produced by code in this
/// class rather than by <random> distributions, whose output is
/// implementation-defined. A given seed therefore yields the same stream on any
/// conforming compiler. Normals use the Marsaglia polar method; the spare
/// variate is cached and is part of the generator state.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(Seed seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  Matrix normal_matrix(Index rows, Index cols, double stddev = 1.0);

  /// Fisher-Yates shuffle of {0..n-1} truncated to the first k entries.
  std::vector<Index> sample_without_replacement(Index n, Index k);

  /// Independent child stream; the parent state is not advanced.
  Rng fork(std::uint64_t stream) const;

 private:
  Rng() = default;

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace driftx
