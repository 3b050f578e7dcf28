#pragma once

#include <cstddef>
#include <functional>

namespace fraclab {

/// Worker count used by parallel_for. Defaults to FRACLAB_THREADS or 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; reductions are then done by the caller in index order, which keeps
/// results independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fraclab
