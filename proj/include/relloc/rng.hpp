#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace relloc {

/// Seeded deterministic random stream. Wraps mt19937_64 and remembers its
/// seed so run records can reproduce every draw. Uniform and Gaussian
/// variates are generated in-house (not via std::*_distribution) so the
/// byte-for-byte output contract does not depend on the standard library's
/// unspecified distribution algorithms.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (one branch per call, no cached spare).
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  std::uint64_t bits() { return engine_(); }

  /// Independent substream for batch element `index`. Derivation is a
  /// SplitMix64-style hash of (master, index), so parallel experiments get
  /// non-overlapping streams no matter how they are scheduled.
  static RandomStream derived(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return RandomStream(z ^ (z >> 31));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace relloc
