#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hetnet {

/// SplitMix64 finalizer. Used for every seed derivation in the project.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// seed = sm(sm(sm(base) ^ sweep_index) ^ trial), sm = splitmix64.
constexpr std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t sweep_index,
                                   std::uint64_t trial) noexcept {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ sweep_index) ^ trial);
}

/// Substream tag for randomness that must not perturb the channel draws.
inline constexpr std::uint64_t kBaselineStreamTag = 0xB5A7E11E0000BE7AULL;

/// Seeded random stream.
///
/// The engine is mt19937_64, whose output sequence is fixed by the C++
/// standard. The variate transforms are written out here instead of using
/// <random> distributions, which differ between standard libraries, so a
/// seed reproduces the same draws on every toolchain.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Unit-mean exponential.
  double exponential() { return -std::log1p(-uniform()); }

  /// Independent child stream.
  Rng fork(std::uint64_t tag) { return Rng(splitmix64(next_u64() ^ tag)); }

private:
  std::mt19937_64 engine_;
};

} // namespace hetnet
