#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tlra {

/// Deterministic xoshiro256** generator.
///
/// All randomness in the library flows through this type. Uniform doubles are
/// quantized to multiples of 2^-53, so identical seeds reproduce identical
/// streams bit-for-bit on any platform. Forked streams are derived from the
/// base seed and a label, not from the current state, so parallel consumers
/// stay reproducible regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0,1), a multiple of 2^-53.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform real in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi] inclusive. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return lo + static_cast<std::int64_t>(x % span);
  }

  /// Standard normal via Box-Muller (no cached spare; stream stays aligned).
  double normal() {
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Child stream identified by (base seed, label); independent of call order.
  Rng fork(std::uint64_t label) const {
    std::uint64_t x = base_seed_ ^ (0x9e3779b97f4a7c15ULL + label * 0xbf58476d1ce4e5b9ULL);
    return Rng(splitmix64(x));
  }

  Rng fork(std::string_view label) const { return fork(fnv1a(label)); }

  std::uint64_t base_seed() const { return base_seed_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t base_seed_;
  std::uint64_t state_[4];
};

}  // namespace tlra
