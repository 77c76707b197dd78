// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_RNG_HPP
#define GRAPHALIGN_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace graphalign {

// splitmix64; used for seed derivation so results do not depend on
// std::hash or libstdc++ internals.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t seed_combine(std::uint64_t seed, std::uint64_t v) {
  return splitmix64(seed ^ splitmix64(v));
}

// Stable string mix for per-sample seed streams: parallel and serial
// batch runs must draw identical values for a given (seed, sample id).
inline std::uint64_t seed_combine(std::uint64_t seed, std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return seed_combine(seed, h);
}

// Bounded draw by rejection sampling. uniform_int_distribution is not
// pinned down by the standard, so we avoid it anywhere reproducibility
// across toolchains matters.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// Uniform double in [0, 1) with 53 bits.
inline double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace graphalign

#endif
