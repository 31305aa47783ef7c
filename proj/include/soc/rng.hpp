#pragma once

#include <cstdint>
#include <random>

namespace soc {

using Engine = std::mt19937_64;

// Purposes a substream can be drawn for. Distinct tags never share seeds.
enum class StreamTag : std::uint64_t {
  kRollout = 1,
  kEvaluation = 2,
  kInit = 3,
  kExploration = 4,
  kReplay = 5,
  kTargetNoise = 6,
  kEnvNoise = 7,
  kEstimator = 8,
};

// Deterministic substream for (master_seed, tag, major, minor).
inline Engine make_stream(std::uint64_t master_seed, StreamTag tag, std::uint64_t major = 0,
                          std::uint64_t minor = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  const auto t = static_cast<std::uint64_t>(tag);
  std::seed_seq seq{lo(master_seed), hi(master_seed), lo(t), lo(major), hi(major), lo(minor), hi(minor)};
  return Engine(seq);
}

// A family of independent streams indexed by k, e.g. one per trajectory in a batch.
struct StreamFamily {
  std::uint64_t seed = 0;
  StreamTag tag = StreamTag::kRollout;
  std::uint64_t major = 0;

  Engine operator()(std::uint64_t k) const { return make_stream(seed, tag, major, k); }
};

}  // namespace soc
