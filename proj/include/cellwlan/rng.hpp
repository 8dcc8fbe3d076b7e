#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace cellwlan {

// SplitMix64 (Steele, Lea & Flood 2014). The i-th output is a pure function
// mix(seed + i * 0x9e3779b97f4a7c15), so a stream is fully determined by its
// 64-bit seed on every platform. Floating-point draws are built here rather
// than through <random> distributions, whose algorithms are implementation
// defined.
class SplitMix64
{
public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept
  {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  result_type operator()() noexcept
  {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_open0() noexcept { return 1.0 - uniform(); }

  double exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

  // Independent stream for replication / restart `index` under a master seed.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) noexcept
  {
    return SplitMix64(mix(seed ^ mix(index + 0x632be59bd9b4e019ULL)));
  }

private:
  std::uint64_t state_;
};

} // namespace cellwlan
