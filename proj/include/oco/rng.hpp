#pragma once
// Seed splitting. Every random quantity in a run is a pure function of
// (seed, stream id, step index):
//
//   stream seed  = seed XOR stream_id
//   step engine  = mt19937_64 seeded with splitmix64(stream seed, t)
//
// Uniform reals and bounded integers are derived from raw engine output with
// fixed formulas so traces are identical across standard library vendors.

#include <cmath>
#include <cstdint>
#include <random>

namespace oco::rng {

inline constexpr std::uint64_t kLossStream = 0x4c4f5353ULL;    // "LOSS"
inline constexpr std::uint64_t kSampleStream = 0x53414d50ULL;  // "SAMP"
inline constexpr std::uint64_t kDemandStream = 0x44454d44ULL;  // "DEMD"

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) {
  return seed ^ stream_id;
}

inline std::mt19937_64 step_engine(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t t) {
  return std::mt19937_64(splitmix64(splitmix64(stream_seed(seed, stream_id)) + t));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Uniform integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t below(std::mt19937_64& eng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r;
  do {
    r = eng();
  } while (r >= limit);
  return r % bound;
}

/// Standard normal via Box-Muller.
inline double normal(std::mt19937_64& eng) {
  const double u1 = 1.0 - uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace oco::rng
