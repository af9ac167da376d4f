#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace ordlab {

/// Worker count: ORDLAB_THREADS if set (>= 1), otherwise the hardware
/// concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Work is split into contiguous chunks;
/// callers write results by index so output order never depends on
/// scheduling. If several iterations throw, the exception of the lowest
/// index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F&& fn) {
  std::vector<T> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace ordlab
