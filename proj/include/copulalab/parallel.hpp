#pragma once

#include <cstddef>
#include <functional>

namespace copulalab {

// Thread cap shared by every parallel loop. Initialized from the
// COPULA_LAB_THREADS environment variable; settable at runtime so tests can
// compare thread counts in-process.
int max_threads();
void set_max_threads(int n);

// Runs fn(i) for i in [0, count). Iterations must be independent; results
// must be written to disjoint slots so the outcome is identical for any
// thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace copulalab
