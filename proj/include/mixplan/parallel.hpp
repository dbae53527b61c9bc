#pragma once

#include <cstddef>
#include <functional>

namespace mixplan {

// Worker count: PLANNER_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned planner_threads();

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = default).
// Each index runs exactly once; callers write results into slot i so output
// order never depends on scheduling. The first exception thrown by any body
// is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace mixplan
