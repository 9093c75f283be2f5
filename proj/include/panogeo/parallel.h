#pragma once

#include <functional>

namespace panogeo {

// Worker count used by parallel_for. Defaults to 1.
void set_num_threads(int n);
int num_threads();

// Calls fn(i) for every i in [begin, end), split into contiguous chunks over
// num_threads() workers. Callers must only write to per-index state, which
// keeps results identical for any thread count.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace panogeo
