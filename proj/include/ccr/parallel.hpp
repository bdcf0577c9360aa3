#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ccr {

inline unsigned default_thread_count()
{
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(begin, end) over contiguous blocks of [0, count). Each index is
// visited exactly once; block boundaries depend on `threads` but callers
// write results by index, so output is independent of the partition.
template <class Fn>
void parallel_blocks(std::size_t count, unsigned threads, Fn&& fn)
{
  threads = std::max(1u, threads);
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    if (count > 0)
      fn(std::size_t{ 0 }, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        if (begin < end)
          fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace ccr
