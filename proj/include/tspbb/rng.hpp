/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <cstddef>
#include <limits>
#include <utility>

namespace tspbb {

/// SplitMix64 step (Steele, Lea, Flood 2014). Used to expand seeds and to
/// derive independent sub-streams from (master seed, stream id).
constexpr std::uint64_t splitmix64(std::uint64_t& state)
{
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z               = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z               = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix_seeds(std::uint64_t a, std::uint64_t b)
{
  std::uint64_t s = a ^ (b * 0xd1342543de82ef95ULL);
  splitmix64(s);
  return splitmix64(s);
}

/// xoshiro256** 1.0 (Blackman, Vigna). State is seeded from a single 64-bit
/// value through SplitMix64. Output is identical on every platform; uniform
/// doubles take the top 53 bits so no std::*_distribution is involved.
class rng_t {
 public:
  using result_type = std::uint64_t;

  explicit rng_t(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed)
  {
    std::uint64_t sm = seed;
    for (auto& w : s_) { w = splitmix64(sm); }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()()
  {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t      = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound)
  {
    if (bound == 0) { return 0; }
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

/// Fisher-Yates shuffle driven by rng_t, so shuffles are platform independent.
template <typename Vec>
void shuffle(Vec& v, rng_t& rng)
{
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace tspbb
