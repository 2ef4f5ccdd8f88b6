#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace qcorr {

// Runs fn(begin, end) on contiguous index chunks. Results written to
// disjoint per-index slots are identical for any thread count.
inline void parallel_for(std::uint64_t count, int threads,
                         const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
  if (threads <= 1 || count < 2) {
    fn(0, count);
    return;
  }
  const std::uint64_t workers =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::uint64_t chunk = (count + workers - 1) / workers;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = w * chunk;
    const std::uint64_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qcorr
