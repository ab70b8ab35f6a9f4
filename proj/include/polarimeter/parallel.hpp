#pragma once

#include <cstddef>
#include <functional>

namespace polarimeter {

/// Worker cap: POLARIMETER_THREADS if set, else the hardware concurrency.
std::size_t max_threads();

/// Overrides the environment for the rest of the process (0 restores it).
void set_max_threads(std::size_t threads);

/// Runs body(i) for i in [0, count). Each index runs exactly once; callers
/// write into per-index slots so results never depend on scheduling.
/// Nested calls from inside a worker run serially on that worker.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace polarimeter
