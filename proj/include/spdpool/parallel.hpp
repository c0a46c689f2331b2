#pragma once
// Minimal data-parallel loop. Worker count is capped by the SPDPOOL_THREADS
// environment variable; each index must write only its own output slot, which
// keeps results independent of the thread count.

#include <cstddef>
#include <functional>

namespace spdpool {

/// Effective worker cap: SPDPOOL_THREADS when set (≥ 1), otherwise the
/// hardware concurrency.
unsigned max_threads();

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace spdpool
