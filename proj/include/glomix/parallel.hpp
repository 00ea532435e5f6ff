#pragma once

#include <cstddef>
#include <functional>

namespace glomix {

/// Worker count: GLOMIX_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Overrides the worker count for the current process (0 restores the default).
void set_worker_count(std::size_t n);

/// Runs body(i) for i in [0, n). Indices are split into contiguous chunks,
/// one per worker; body must only write state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace glomix
