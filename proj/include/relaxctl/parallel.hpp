#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace relaxctl {

/// Runs fn(lo, hi) over contiguous chunks of [0, n) on up to `threads`
/// workers. Chunking only affects scheduling, never results: callers write
/// to disjoint per-index slots and reduce afterwards in a fixed order.
template <typename Fn>
void parallel_for(int threads, std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = std::min(n, w * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo < hi) pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  fn(std::size_t{0}, std::min(n, chunk));
}

/// Pairwise summation of values[offset + i * stride] for i in [0, count),
/// in a fixed association order.
inline double pairwise_sum(std::span<const double> values, std::size_t count, std::size_t stride = 1,
                           std::size_t offset = 0) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += values[offset + i * stride];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half, stride, offset) +
         pairwise_sum(values, count - half, stride, offset + half * stride);
}

}  // namespace relaxctl
