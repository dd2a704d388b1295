#pragma once

#include <cstddef>
#include <functional>

namespace abfield {

// Worker cap for batch evaluation: ABFIELD_THREADS if set (clamped to at
// least 1), hardware concurrency otherwise. Read on every call so tests can
// vary it within one process.
std::size_t worker_limit();

// Runs fn(0..n-1), possibly on several workers. Each index writes only its
// own slot, so results never depend on the worker count; callers reduce the
// slots afterwards in a fixed order. Nested calls from inside a worker run
// inline on that worker.
void parallel_apply(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace abfield
