#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace cdpp {

/// Serial is the reference path; parallel runs the same per-index work under
/// OpenMP. Every index owns its own RNG stream, so both give identical results.
enum class Exec { serial, parallel };

/// Calls fn(i) for i in [0, n). Exceptions from workers are rethrown after
/// the loop (the first one wins).
template <class Fn>
void parallel_for(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

/// Sets the OpenMP thread count; values below 1 leave the default.
inline void set_threads(int n) {
  if (n >= 1) omp_set_num_threads(n);
}

}  // namespace cdpp
