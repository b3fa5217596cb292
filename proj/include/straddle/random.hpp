#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace straddle {

/// Seeded generator whose derived draws do not depend on the standard
/// library's distribution implementations (those are unspecified), so
/// results are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n).
  std::uint64_t index(std::uint64_t n) {
    const unsigned __int128 product = (unsigned __int128)engine_() * n;
    return std::uint64_t(product >> 64);
  }

  /// Standard normal (Box-Muller, no caching).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

/// Decorrelates seeds derived from one base seed (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace straddle
