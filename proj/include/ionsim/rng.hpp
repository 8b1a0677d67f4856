#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ionsim {

// splitmix64 finalizer; decorrelates structured counter values.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Engine keyed by (seed, stream counters). Draw order inside one stream is
// fixed by the caller, so results do not depend on scheduling or thread count.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                  std::uint64_t c = 0) {
  std::uint64_t s = mix64(seed ^ mix64(a ^ mix64(b ^ mix64(c))));
  return std::mt19937_64(s);
}

// Uniform in [0, 1) built directly from engine words; avoids the
// implementation-defined std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller, one value per call (no cached spare).
inline double normal01(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace ionsim
