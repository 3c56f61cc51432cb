#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace hjb {

/// Stateless normal draws keyed by (seed, path, step, pair). The same key
/// always yields the same pair, whatever order paths are executed in.
class CounterNormal {
 public:
  explicit constexpr CounterNormal(std::uint64_t seed) noexcept : seed_(seed) {}

  /// Two independent standard normals (Box-Muller on two hashed uniforms).
  std::pair<double, double> pair(std::uint64_t path, std::uint64_t step, std::uint64_t pair_index) const noexcept {
    const std::uint64_t key = mix(mix(mix(seed_) ^ path) ^ step) ^ pair_index;
    const double u1 = to_unit(mix(key ^ 0x5851f42d4c957f2dULL));
    const double u2 = to_unit(mix(key ^ 0x14057b7ef767814fULL));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  /// splitmix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  // Open interval (0, 1): 53 random bits, offset by half an ulp.
  static constexpr double to_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed_;
};

}  // namespace hjb
