#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace gazescreen {

// Runs body(i) for i in [0, n). jobs <= 1 runs the plain serial loop, which
// is the reference path; jobs > 1 distributes iterations over an OpenMP team.
// Bodies must write only to slot i of preallocated outputs, so results do not
// depend on the schedule. The first exception thrown by any iteration (lowest
// index) is rethrown after the loop.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex mu;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gazescreen
