#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace cogcap {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 64-bit seed is the key; the 128-bit counter holds (draw index, stream
/// index), so every (seed, stream) pair is an independent, replayable
/// sequence and trajectories can be generated in any order.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == 2) refill();
    const std::size_t i = 2 * used_++;
    return (static_cast<std::uint64_t>(buffer_[i + 1]) << 32) | buffer_[i];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe to take the logarithm of.
  double uniform_positive() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential variate with density rate * exp(-rate x).
  double exponential(double rate) { return -std::log(uniform_positive()) / rate; }

  /// Two independent standard normals (Marsaglia polar method).
  std::array<double, 2> normal_pair() {
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    return {u * scale, v * scale};
  }

  std::uint64_t blocks_generated() const { return counter_; }

  /// The raw ten-round bijection, exposed for known-answer tests.
  static Block block(Block counter, Key key);

 private:
  void refill();

  Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Block buffer_{};
  std::size_t used_ = 2;
};

/// SplitMix64 finalizer, used to derive sub-seeds (e.g. one per sweep point).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace cogcap
