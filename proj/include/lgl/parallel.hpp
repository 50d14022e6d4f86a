#pragma once

#include <cstddef>
#include <functional>

namespace lgl {

// Worker count from LGL_WORKERS, else the hardware concurrency (at least 1).
std::size_t default_worker_count();

// Runs fn(0..n-1) on up to `workers` threads (0 = default_worker_count()).
// Each index runs exactly once; the first exception is rethrown after all
// workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace lgl
