#pragma once

#include <cstddef>
#include <functional>

namespace rsl {

// Worker cap: min(hardware_concurrency, RSL_THREADS) with RSL_THREADS unset
// or 0 meaning "hardware". Read once.
std::size_t worker_limit();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker; each index writes only its own output slots, so results are
// independent of the worker count and identical to a serial run.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace rsl
