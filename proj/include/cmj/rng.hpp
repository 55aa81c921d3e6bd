#ifndef CMJ_RNG_HPP
#define CMJ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace cmj {

/// SplitMix64 output function: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replicate `index` in a batch seeded with `base`. The generator
/// expands it through SplitMix64, so neighbouring seeds give unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) { return base ^ index; }

/// xoshiro256** 1.0 (Blackman & Vigna), state filled by SplitMix64 from a
/// 64-bit seed. Satisfies UniformRandomBitGenerator.
///
/// All variate transforms are defined here rather than through <random>
/// distributions, so a (seed, call sequence) pair yields the same doubles on
/// every standard library.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      word = mix64(x);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
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

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Uniform integer on [0, n), n > 0 (multiply-shift; bias below 2^-64 n).
  std::uint64_t below(std::uint64_t n) {
    __extension__ using wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<wide>((*this)()) * n) >> 64);
  }

  /// Exponential variate with the given rate.
  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace cmj

#endif  // CMJ_RNG_HPP
