#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace soc {

// Trajectories per lockstep rollout chunk. Chunk boundaries never depend on the
// thread count, so results are identical for any number of workers.
inline constexpr std::size_t kRolloutChunk = 64;

// Calls fn(i) for i in [0, n) on up to `threads` workers. Work items must write
// to disjoint outputs; the first exception is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

// Splits [0, count) into kRolloutChunk-sized chunks and runs fn(chunk, begin, end).
template <typename Fn>
void for_each_chunk(std::size_t count, std::size_t threads, Fn&& fn) {
  const std::size_t chunks = (count + kRolloutChunk - 1) / kRolloutChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kRolloutChunk;
    fn(c, begin, std::min(count, begin + kRolloutChunk));
  });
}

inline std::size_t num_chunks(std::size_t count) { return (count + kRolloutChunk - 1) / kRolloutChunk; }

}  // namespace soc
