#pragma once
// Counter-based pseudo-random generator (SplitMix64 with the standard
// constants: increment 0x9E3779B97F4B7C15, mixers 0xBF58476D1CE4E5B9 and
// 0x94D049BB133111EB). Draw i is a pure function of (seed, i), so streams
// are reproducible and restartable from a saved counter.

#include <cmath>
#include <cstdint>

namespace spdpool {

class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4B7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in (0, 1].
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal deviate via Box–Muller. Consumes two draws and
  /// discards the paired deviate so the counter advances uniformly.
  double next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Unbiased-enough uniform index in [0, bound) via 128-bit multiply.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  std::uint64_t counter() const { return counter_; }
  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace spdpool
