#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace covfam {

/// Thread count for a kernel: `requested` if positive, else $COVFAM_THREADS,
/// else the OpenMP default.
int resolve_threads(int requested);

/// Runs body(i) for i in [0, count) on up to `threads` OpenMP threads.
/// Iterations must write only to their own slot. Runs serially when nested
/// inside another parallel region. The exception from the lowest failing
/// index is rethrown after the loop.
template <class Body>
void parallel_for(std::ptrdiff_t count, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count > 0 ? count : 0));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : 1) if (threads > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

/// Serial reference for parallel_for; same semantics, one thread.
template <class Body>
void serial_for(std::ptrdiff_t count, Body&& body) {
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    body(i);
  }
}

}  // namespace covfam
