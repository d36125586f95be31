#ifndef LANGINC_RNG_HPP_
#define LANGINC_RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace langinc {

/*
 * xoshiro256** (Blackman & Vigna) seeded through splitmix64.
 *
 * This is the only generator used by the toolkit. Normal variates come from
 * the Box-Muller transform with the second value cached, uniforms from the
 * top 53 bits. Both are defined here rather than through <random>
 * distributions so that a fixed seed gives the same stream on every
 * standard library.
 */
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  /// Stream for chain `index` of a multi-chain run: seeded with seed XOR index.
  static Rng for_chain(std::uint64_t seed, std::uint64_t index) { return Rng(seed ^ index); }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
    has_cached_ = false;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::array<std::uint64_t, 4> s_{};
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace langinc

#endif  // LANGINC_RNG_HPP_
