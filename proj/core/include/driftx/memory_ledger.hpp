#pragma once

#include <cstddef>

namespace driftx {

/// Byte counts of the buffers a field evaluation actually allocates. Filled in
/// by the projected-attraction and exact-repulsion paths when a ledger is
/// passed; output and accumulator buffers (B x D, B) are not counted.
struct MemoryLedger {
  std::size_t resident_summary_bytes = 0;  // sum over shards of A_p and W
  std::size_t feature_workspace_bytes = 0;  // B x max_s r_s query features
  std::size_t repulsion_bytes = 0;  // B x N- repulsion kernel

  std::size_t peak_bytes() const noexcept {
    return resident_summary_bytes + feature_workspace_bytes + repulsion_bytes;
  }
};

}  // namespace driftx
