#include "driftx/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace driftx {
namespace {

std::atomic<int> g_override{0};

int env_threads() {
  static const int value = [] {
    if (const char* env = std::getenv("DRIFTX_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) return n;
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  }();
  return value;
}

}  // namespace

int thread_count() {
  const int o = g_override.load(std::memory_order_relaxed);
  return o > 0 ? o : env_threads();
}

ScopedThreadLimit::ScopedThreadLimit(int threads) : previous_(g_override.load()) {
  g_override.store(std::max(1, threads));
}

ScopedThreadLimit::~ScopedThreadLimit() { g_override.store(previous_); }

void parallel_for(Index n, const std::function<void(Index, Index)>& body, Index min_chunk) {
  if (n <= 0) return;
  const Index max_workers = std::max<Index>(1, n / std::max<Index>(1, min_chunk));
  const Index workers = std::min<Index>(thread_count(), max_workers);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  const Index chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (Index w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace driftx
