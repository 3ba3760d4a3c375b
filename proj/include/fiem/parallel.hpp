#pragma once

/// @file parallel.hpp
/// @brief Index-ordered parallel map; results do not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace fiem {

/// out[i] = fn(i) for i in [0, n), computed by up to `threads` workers.
/// The first exception thrown by any job is rethrown after all workers join.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, unsigned threads, F&& fn) {
  std::vector<R> out(n);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace fiem
