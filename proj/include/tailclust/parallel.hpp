#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

namespace tailclust {

// Runs fn(i) for i in [0, count) using a static block partition of the index
// range. With threads <= 1 everything runs on the calling thread. Work items
// must write to disjoint locations; the split is deterministic, so results do
// not depend on the thread count as long as each fn(i) is itself
// deterministic.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads < 0) throw std::invalid_argument("thread count must be >= 0");
  std::size_t nthreads = threads == 0 ? 1 : static_cast<std::size_t>(threads);
  nthreads = std::min(nthreads, count);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::vector<std::exception_ptr> errors(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    std::size_t lo = count * t / nthreads;
    std::size_t hi = count * (t + 1) / nthreads;
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace tailclust
