#pragma once

#include <cstddef>
#include <functional>

namespace uh {

// Worker count: ULTRAHOLO_THREADS when set (>= 1), else hardware concurrency.
unsigned thread_count();

// Runs f(0..n-1) across workers; each index must write only its own output slot.
// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace uh
