#pragma once

#include <cstdint>
#include <functional>

namespace netsem {

// Worker count: requested when positive, otherwise the hardware concurrency.
int ResolveThreads(int requested);

// Calls fn(i) for i in [0, count) on up to `threads` workers. Results must be
// stored by index. If any call throws, the exception from the lowest failing
// index is rethrown after all workers stop.
void ParallelFor(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

}  // namespace netsem
