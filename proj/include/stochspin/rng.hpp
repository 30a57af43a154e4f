#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, particle, step), so ensembles give the same numbers no matter
// how particles are split across workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace stochspin {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Independent sub-streams drawn from one seed.
enum class RngStream : std::uint32_t {
  noise = 0,
  initial_condition = 1,
  branch = 2,
  plate = 3,
};

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, RngStream stream = RngStream::noise) noexcept {
    const std::uint64_t k = splitmix64(seed ^ (std::uint64_t{0x5851F42D4C957F2Dull} * (static_cast<std::uint64_t>(stream) + 1)));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  Philox4x32::Counter block(std::uint64_t particle, std::uint64_t slot) const noexcept {
    return Philox4x32::generate({static_cast<std::uint32_t>(slot), static_cast<std::uint32_t>(slot >> 32),
                                 static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32)},
                                key_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t particle, std::uint64_t step) const noexcept {
    const auto b = block(particle, step);
    return to_unit_open_right(b[0], b[1]);
  }

  /// Standard normal for (particle, step). Steps 2k and 2k+1 share one Philox
  /// block and take the cosine and sine halves of one Box-Muller pair.
  double normal(std::uint64_t particle, std::uint64_t step) const noexcept {
    const auto pair = normal_pair(particle, step >> 1);
    return (step & 1u) ? pair[1] : pair[0];
  }

  /// The Box-Muller pair for steps (2*pair_index, 2*pair_index + 1).
  std::array<double, 2> normal_pair(std::uint64_t particle, std::uint64_t pair_index) const noexcept {
    const auto b = block(particle, pair_index);
    // u1 in (0, 1] keeps the logarithm finite
    const double u1 = 1.0 - to_unit_open_right(b[0], b[1]);
    const double u2 = to_unit_open_right(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  static constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  static double to_unit_open_right(std::uint32_t lo, std::uint32_t hi) noexcept {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  Philox4x32::Key key_{};
};

}  // namespace stochspin
