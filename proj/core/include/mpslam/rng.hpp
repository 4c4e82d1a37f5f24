#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mpslam {

using Rng = std::mt19937_64;

/// Stream tags for deterministic substreams.
enum class StreamTag : std::uint64_t {
  kFrame = 1,
  kAgent = 2,
  kFeature = 3,
  kBirth = 4,
  kPrior = 5,
  kResample = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Engine for one (seed, tag, ids...) combination; independent of call order.
inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix64(seed ^ 0xA0761D6478BD642Full);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  for (std::uint64_t id : ids) h = splitmix64(h ^ (id + 0x632BE59BD9B4E019ull));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

}  // namespace mpslam
