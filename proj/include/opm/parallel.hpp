#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include <omp.h>

namespace opm {

// Calls fn(i) for i in [0, n). threads <= 1 is the plain serial loop that the
// parallel path is tested against; otherwise an OpenMP loop with dynamic
// scheduling. Callers write results into per-index slots and reduce in index
// order afterwards, so the outcome never depends on the thread count. The
// first exception (lowest index) is rethrown after the loop.
template <typename Fn>
void ParallelFor(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline int DefaultThreads() { return omp_get_max_threads(); }

}  // namespace opm
