#pragma once

// Seeded pseudo-random generator used by every stochastic component.
//
// Algorithm: xoshiro256** (Blackman & Vigna), state filled from the 64-bit
// seed by four rounds of splitmix64. This choice is frozen: changing it
// changes every trace the harness produces.
//
// Derived streams: child(k) is a generator seeded with seed ^ k. Each module
// owns a fixed constant (see stream namespace) so adding a consumer never
// shifts the draws of another.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "mecsec/core/error.hpp"

namespace mecsec {

namespace stream {
inline constexpr std::uint64_t kChannel = 0x6a09e667f3bcc908ULL;
inline constexpr std::uint64_t kJammer = 0xbb67ae8584caa73bULL;
inline constexpr std::uint64_t kObservation = 0x3c6ef372fe94f82bULL;
inline constexpr std::uint64_t kAgent = 0xa54ff53a5f1d36f1ULL;
inline constexpr std::uint64_t kAuth = 0x510e527fade682d1ULL;
inline constexpr std::uint64_t kNetworkInit = 0x9b05688c2b3e6c1fULL;
inline constexpr std::uint64_t kReplay = 0x1f83d9abfb41bd6bULL;
inline constexpr std::uint64_t kPretrain = 0x5be0cd19137e2179ULL;
}  // namespace stream

class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  SeededRng child(std::uint64_t stream_constant) const { return SeededRng(seed_ ^ stream_constant); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
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

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    expects(n > 0, "uniform_index: empty range");
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal by Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t s_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mecsec
