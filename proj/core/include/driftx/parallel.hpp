#pragma once

#include <functional>

#include "driftx/types.hpp"

namespace driftx {

/// Worker cap: DRIFTX_THREADS if set and positive, else hardware concurrency.
/// A ScopedThreadLimit in effect takes precedence.
int thread_count();

/// Temporarily caps worker threads for the current process (used by timed
/// benchmark regions). Not reentrant across threads.
class ScopedThreadLimit {
 public:
  explicit ScopedThreadLimit(int threads);
  ~ScopedThreadLimit();
  ScopedThreadLimit(const ScopedThreadLimit&) = delete;
  ScopedThreadLimit& operator=(const ScopedThreadLimit&) = delete;

 private:
  int previous_;
};

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on each.
/// Chunks write disjoint outputs, so results do not depend on the thread count.
void parallel_for(Index n, const std::function<void(Index, Index)>& body, Index min_chunk = 16);

}  // namespace driftx
