// Small persistent worker pool for data-parallel loops.
//
// parallel_for splits [0, n) into contiguous chunks, one per worker. Every
// output element is written by exactly one chunk, so results do not depend on
// the worker count. Calls from inside a worker run inline, which keeps nested
// parallelism (grid cells that train models that multiply matrices) from
// oversubscribing the machine.
#pragma once

#include <cstddef>
#include <functional>

namespace diffdist {

// Process-wide worker cap; defaults to the hardware concurrency.
void set_max_threads(int n);
int max_threads();

using RangeFn = std::function<void(std::size_t begin, std::size_t end)>;

void parallel_for(std::size_t n, const RangeFn& fn);

}  // namespace diffdist
