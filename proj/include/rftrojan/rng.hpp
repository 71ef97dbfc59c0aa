// Seed derivation for order-independent per-frame random streams.
#pragma once

#include <cstdint>
#include <random>

namespace rft {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent purposes drawing from one per-frame seed.
enum class Stream : std::uint64_t {
  kBits = 1,
  kChannel = 2,
  kNoise = 3,
  kSelect = 4,
  kInject = 5,
  kSplit = 6,
  kInit = 7,
  kShuffle = 8,
  kDropout = 9,
  kProbe = 10,
  kDefense = 11,
};

/// Per-frame seed: master XOR frame index.
constexpr std::uint64_t frame_seed(std::uint64_t master, std::uint64_t index) { return master ^ index; }

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  return Rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream) * 0x2545f4914f6cdd1dULL)));
}

}  // namespace rft
