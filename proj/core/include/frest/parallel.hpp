#pragma once

#include <Eigen/Dense>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace frest {

/// Worker cap from the FREST_THREADS environment variable (default 1).
int thread_cap();

/// Runs fn(i) for i in [0, count) across at most thread_cap() workers in
/// contiguous chunks. Safe only for bodies that write disjoint slots; results
/// do not depend on the thread count.
template <typename Fn>
void parallel_for_index(Eigen::Index count, Fn&& fn) {
  const Eigen::Index workers =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(thread_cap()), count);
  if (workers <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const Eigen::Index chunk = (count + workers - 1) / workers;
  for (Eigen::Index w = 0; w < workers; ++w) {
    const Eigen::Index begin = w * chunk;
    const Eigen::Index end = std::min(count, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (Eigen::Index i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace frest
