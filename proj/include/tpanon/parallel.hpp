#pragma once

#include <cstddef>
#include <functional>

namespace tpanon {

// Thread count from TPANON_THREADS, else the hardware concurrency.
unsigned default_threads();

// Calls fn(i) for every i in [0, n) using up to `threads` workers with a
// static contiguous split. fn must only write to state owned by index i.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace tpanon
