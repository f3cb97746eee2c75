#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sloppykit {

// SplitMix64 mixing step; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic substream keyed by (seed, path). Streams for distinct paths
// are independent of the order in which they are created or consumed, which
// keeps per-point and per-particle draws reproducible.
inline std::mt19937_64 substream(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ p);
  return std::mt19937_64(h);
}

}  // namespace sloppykit
