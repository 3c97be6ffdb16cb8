#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace curvesgd {

/// Seeded stream used everywhere randomness is needed.
///
/// Seed-to-stream mapping (stable across releases and platforms):
///   engine:  std::mt19937_64 seeded with the 64-bit seed as-is
///   index:   high 64 bits of (next() * n), i.e. floor(next() * n / 2^64)
///   uniform: (next() >> 11) * 2^-53, in [0, 1)
///   normal:  Box-Muller on two uniforms, no caching
/// std::*_distribution is avoided because its algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  std::size_t index(std::size_t n) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n);
    return static_cast<std::size_t>(prod >> 64);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace curvesgd
