#pragma once

#include <functional>

namespace incompat {

// Worker count used by per-triangle loops; 0 selects hardware concurrency.
void set_thread_count(int threads);
int thread_count();

// Runs body(begin, end) over a static partition of [0, n).  Callers write into
// per-index slots and reduce serially afterwards, so results never depend on
// the thread count.
void parallel_for(int n, const std::function<void(int, int)> &body, int min_chunk = 2048);

} // namespace incompat
