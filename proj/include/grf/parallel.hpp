#ifndef GRF_PARALLEL_HPP
#define GRF_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace grf {

/// Worker count: GRF_THREADS if set and positive, otherwise the hardware
/// concurrency (0 means auto).
inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRF_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0)
        return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // unparsable: fall back to auto
    }
  }
  return hw;
}

/// Runs body(begin, end) over contiguous chunks of [0, n).  Each index is
/// handled by exactly one call, so writes to per-index slots need no locks.
template <class Body>
void parallel_for_chunks(std::size_t n, Body&& body,
                         unsigned threads = thread_count()) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    if (n > 0)
      body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e)
      break;
    pool.emplace_back([&, t, b, e] {
      try {
        body(b, e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool)
    th.join();
  for (auto& err : errors)
    if (err)
      std::rethrow_exception(err);
}

} // namespace grf

#endif // GRF_PARALLEL_HPP
