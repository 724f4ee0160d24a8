#pragma once

#include <cstddef>
#include <functional>

namespace viewpos {

// Worker count used by every data-parallel loop in the library. Zero means
// "all available cores".
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls fn(i) for every i in [0, n). Indices are handed out dynamically, so
// callers must write results by index to stay independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace viewpos
