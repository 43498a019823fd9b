#include "copulalab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace copulalab {

namespace {

int initial_cap() {
  if (const char* env = std::getenv("COPULA_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::atomic<int> g_max_threads{0};

}  // namespace

int max_threads() {
  int v = g_max_threads.load(std::memory_order_relaxed);
  if (v == 0) {
    v = initial_cap();
    g_max_threads.store(v, std::memory_order_relaxed);
  }
  return v;
}

void set_max_threads(int n) {
  g_max_threads.store(n >= 1 ? n : 1, std::memory_order_relaxed);
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
  const int threads = max_threads();
#ifdef _OPENMP
  if (threads > 1 && count > 1) {
    // Round-robin chunks balance triangular workloads; results go to
    // caller-indexed slots, so the schedule cannot affect the output.
#pragma omp parallel for schedule(static, 1) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  (void)threads;
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

}  // namespace copulalab
