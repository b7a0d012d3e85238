#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hawkes_evolve/errors.hpp"

namespace hawkes_evolve {

// Worker count: explicit request, else HAWKES_EVOLVE_THREADS, else the
// hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HAWKES_EVOLVE_THREADS"); env && *env) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw DomainError(std::string("HAWKES_EVOLVE_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls body(r) for r in [0, n). Each replication owns its RNG stream and
// writes only its own result slot, so output is independent of the schedule.
// The first exception thrown by any body is rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    for (std::size_t r = 0; r < n; ++r) body(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n || failed.load()) return;
      try {
        body(r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

template <class T, class Body>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Body&& body) {
  std::vector<T> out(n);
  parallel_for(n, threads, [&](std::size_t r) { out[r] = body(r); });
  return out;
}

}  // namespace hawkes_evolve
