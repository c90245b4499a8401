#pragma once

// Random number generation for replicated Monte-Carlo runs.
//
// Every replication owns an independent xoshiro256** engine whose state is
// derived from (master seed, tag...) through a splitmix64 chain. The
// derivation is a pure function of its inputs, so a replication produces the
// same numbers no matter which worker runs it or in which order.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace nsb {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: hashes the master seed together with any
/// number of integer tags (replication index, grid point, purpose...).
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc908ULL);
  for (auto t : tags) h = splitmix64(h ^ splitmix64(t + 0x3c6ef372fe94f82bULL));
  return h;
}

/// xoshiro256** 1.0. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL) noexcept {
    std::uint64_t z = seed;
    for (auto& w : s_) {
      z += 0x9e3779b97f4a7c15ULL;
      w = splitmix64(z);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
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

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Unit-rate exponential, strictly positive.
  double exponential() noexcept { return -std::log(uniform_open()); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept {
  return Rng(derive_seed(master, tags));
}

}  // namespace nsb
