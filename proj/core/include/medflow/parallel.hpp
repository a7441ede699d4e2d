#pragma once

// Data-parallel sweeps with a fixed work partition and a fixed-shape summation
// tree, so every result is independent of the worker count.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace medflow {

inline int default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

inline int resolve_threads(int requested) {
  return requested <= 0 ? default_threads() : requested;
}

// Runs fn(begin, end) over a static partition of [0, n). fn must only write
// to locations owned by its own range.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2048) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

// Pairwise (fixed-block binary tree) reduction. The summation order depends
// only on the array length, never on thread count.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 64) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace medflow
