#pragma once

#include <cstddef>
#include <functional>

namespace entrylab {

/// Number of workers for a --jobs value; 0 means all available cores.
unsigned resolve_jobs(int jobs);

/// Calls body(i) for i in [0, n) on up to `jobs` threads. Each index must
/// write only its own output slot, so results do not depend on scheduling.
/// The first exception thrown by a body is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace entrylab
