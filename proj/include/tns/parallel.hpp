// Element-parallel loops with results stored per index, so reductions done
// afterwards in index order are independent of the worker count.
#pragma once

#include <cstddef>
#include <functional>

namespace tns {

/// Worker count used by parallel loops. Defaults to the TNS_THREADS
/// environment variable, else 1.
[[nodiscard]] int num_threads();
void set_num_threads(int n);

/// Calls fn(i) for i in [0, n), split in contiguous chunks across workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tns
