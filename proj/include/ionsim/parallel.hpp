#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ionsim {

// Static block partition of [0, count) over n_threads. Each index writes only
// its own output slot, so the result is identical for any thread count.
inline void parallel_for(std::size_t count, int n_threads,
                         const std::function<void(std::size_t)>& body) {
  if (n_threads < 1) n_threads = 1;
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(n_threads), count);
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nt);
  std::size_t chunk = (count + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ionsim
