#pragma once

#include <cstddef>
#include <functional>

namespace pidparse {

/// Worker count for `requested` (<= 0 means hardware concurrency), capped by
/// the PID_THREADS environment variable when it holds a positive integer.
int resolve_threads(int requested = 0);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace pidparse
