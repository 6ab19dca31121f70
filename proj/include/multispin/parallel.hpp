#pragma once

// Deterministic chunked reductions. Chunk boundaries depend only on the
// problem size, never on the worker count, and partial results are combined
// with a fixed pairwise tree, so sums are bit-identical for any thread count.

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace multispin {

/// Number of workers used by library reductions (0 means hardware default).
void set_thread_count(unsigned count);
unsigned thread_count();

template <class T>
T pairwise_sum(std::vector<T> values) {
  if (values.empty()) return T{};
  while (values.size() > 1) {
    std::size_t half = (values.size() + 1) / 2;
    for (std::size_t i = 0; i + half < values.size(); ++i) values[i] += values[i + half];
    values.resize(half);
  }
  return values.front();
}

/// Evaluates `partial(begin, end)` over fixed chunks of [0, count) and returns
/// the pairwise-reduced total.
template <class T, class Partial>
T chunked_sum(std::size_t count, std::size_t chunk, Partial&& partial) {
  if (count == 0) return T{};
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (count + chunk - 1) / chunk;
  std::vector<T> parts(chunks);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, thread_count()), chunks));
  auto run = [&](unsigned worker) {
    for (std::size_t c = worker; c < chunks; c += workers) {
      std::size_t begin = c * chunk;
      parts[c] = partial(begin, std::min(count, begin + chunk));
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
  }
  return pairwise_sum(std::move(parts));
}

/// Runs `body(i)` for i in [0, count) on the worker pool. Results must be
/// written to per-index slots by the caller.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, thread_count()), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  auto run = [&](unsigned worker) {
    for (std::size_t i = worker; i < count; i += workers) body(i);
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
}

}  // namespace multispin
