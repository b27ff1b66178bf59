#ifndef NETSHIELD_RNG_HPP
#define NETSHIELD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace netshield {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Minimal PCG32 generator. Fully specified arithmetic, so streams are
/// reproducible bit-for-bit across platforms, unlike the std distributions.
struct Pcg32 {
  std::uint64_t state = 0;
  std::uint64_t inc = 1;  // stream selector, must be odd

  Pcg32(std::uint64_t seed, std::uint64_t stream_id) {
    inc = (splitmix64(stream_id) << 1u) | 1u;
    state = 0;
    next();
    state += splitmix64(seed);
    next();
  }

  std::uint32_t next() {
    std::uint64_t old = state;
    state = old * 6364136223846793005ULL + inc;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  /// Uniform draw in the open interval (0,1).
  double uniform01() {
    constexpr double inv =
        1.0 / (static_cast<double>(std::numeric_limits<std::uint32_t>::max()) + 1.0);
    return (static_cast<double>(next()) + 0.5) * inv;
  }
};

/// Standard normal sampler (Box-Muller, cached pair).
struct NormalSampler {
  Pcg32 rng;
  bool has_spare = false;
  double spare = 0.0;

  explicit NormalSampler(Pcg32 generator) : rng(generator) {}

  double next() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u1 = rng.uniform01();
    double u2 = rng.uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare = r * std::sin(theta);
    has_spare = true;
    return r * std::cos(theta);
  }
};

/// Per-counter substream: sample index -> independent generator. Partitioning
/// samples across workers gives the same draws as a sequential run.
inline NormalSampler substream(std::uint64_t seed, std::uint64_t counter) {
  return NormalSampler(Pcg32(seed, counter));
}

}  // namespace netshield

#endif  // NETSHIELD_RNG_HPP
