#pragma once

#include <cmath>
#include <cstdint>

#include "cavilab/constants.hpp"

namespace cavilab {

// Self-contained xoshiro256++ generator seeded through splitmix64. The
// standard-library distributions are implementation-defined, so seeded runs
// would not reproduce across toolchains; this one is bit-stable everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate (Box-Muller, one spare cached).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(constants::two_pi * u2);
    have_spare_ = true;
    return r * std::cos(constants::two_pi * u2);
  }

  /// Unit-mean exponential deviate.
  double exponential() { return -std::log(1.0 - uniform()); }

  static std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Stable per-point seed for sweeps: the same (master, index) pair always maps
/// to the same stream, so execution order and parallel fan-out cannot change
/// results.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  std::uint64_t a = Rng::splitmix64(s);
  std::uint64_t b = Rng::splitmix64(s);
  return a ^ (b + index);
}

}  // namespace cavilab
