#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>

namespace lfptd {

/// SplitMix64 (Steele, Lea & Flood 2014): 64-bit state, increment
/// 0x9E3779B97F4A7C15, output mix with multipliers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB. Every generator in the library draws from this stream so
/// seeded output is bit-identical across platforms and languages.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log argument.
  double uniform_open_zero() noexcept { return 1.0 - uniform(); }

  /// Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal via the Box-Muller transform; the second variate of each
  /// pair is cached.
  double normal() noexcept;

 private:
  std::uint64_t state_;
  std::optional<double> spare_;
};

/// Derives an independent seed for stream `index` under `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Fisher-Yates shuffle driven by SplitMix64.
template <typename T>
void shuffle(std::span<T> values, SplitMix64& rng) noexcept {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace lfptd
