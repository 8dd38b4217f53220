#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace fluscope {

/// Sets the OpenMP team size used by every parallel kernel (0 keeps the runtime default).
inline void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

inline int thread_count() { return omp_get_max_threads(); }

/// Runs body(i) for i in [0, n) across OpenMP threads. Iterations must write
/// disjoint outputs. The first exception thrown by any iteration is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace fluscope
