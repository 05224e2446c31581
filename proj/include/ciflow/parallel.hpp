#pragma once

#include <cstddef>

#include <omp.h>

namespace ciflow {

/// Serial is the reference path kept for testing; Parallel distributes
/// independent evaluation points over OpenMP threads. Every point's work,
/// including its reduction over samples, runs on one thread in a fixed
/// order, so both paths produce identical bits.
enum class Execution { Serial, Parallel };

inline void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

inline int thread_count() { return omp_get_max_threads(); }

template <class Fn>
void for_each_point(std::size_t count, Execution policy, Fn&& fn) {
  if (policy == Execution::Serial) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace ciflow
