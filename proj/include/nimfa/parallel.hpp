#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace nimfa {

/// Replicas per work unit. Units are merged in index order, so results do not
/// depend on the thread count.
inline constexpr std::size_t kReplicaChunk = 64;

/// Runs body(acc, index) for index in [0, count) on `threads` workers and merges
/// per-chunk accumulators (Acc::merge) in chunk order.
template <typename Acc, typename Make, typename Body>
Acc parallel_accumulate(std::size_t count, unsigned threads, Make make, Body body) {
  const std::size_t chunks = (count + kReplicaChunk - 1) / kReplicaChunk;
  std::vector<std::optional<Acc>> parts(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        Acc acc = make();
        const std::size_t end = std::min(count, (c + 1) * kReplicaChunk);
        for (std::size_t idx = c * kReplicaChunk; idx < end; ++idx) body(acc, idx);
        parts[c].emplace(std::move(acc));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(chunks, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  Acc total = make();
  for (auto& p : parts) total.merge(*p);
  return total;
}

/// Default worker count: hardware concurrency, at least one.
inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace nimfa
