#pragma once

#include <cstddef>
#include <functional>

namespace moequant {

// Worker cap: MOEQUANT_THREADS when set (>= 1), hardware concurrency
// otherwise.
int max_threads();

// Runs body(0..count-1) across up to max_threads() workers. Bodies must
// write to disjoint slots; any reduction happens after the call, in index
// order, so results never depend on the thread count.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& body);

}  // namespace moequant
