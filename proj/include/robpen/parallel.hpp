#pragma once

#include <cstddef>
#include <functional>

namespace robpen {

// Worker count used by block-parallel loops. Defaults to 1.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs fn(b) for every block b in [0, n_blocks). Blocks are independent; the
// caller stores per-block results and reduces them in block order, which makes
// every reduction independent of the worker count. If several blocks throw,
// the exception of the lowest block index is rethrown.
void parallel_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn);

} // namespace robpen
