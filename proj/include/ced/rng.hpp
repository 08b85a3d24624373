#pragma once
// Pinned, platform-independent random number generation.
//
// Everything that samples goes through Xoshiro256pp seeded via splitmix64,
// with bounded integers drawn by Lemire's method. std::* distributions are
// not used anywhere: their output is implementation-defined and would break
// byte-identical reproducibility across toolchains.

#include <cstdint>
#include <limits>

namespace ced {

// splitmix64 finalizer; also used to derive substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Substream derivation: substream(base, tag) is independent of
// substream(base, tag') for tag != tag'. Used for per-trace and per-split
// streams so generation order never depends on worker scheduling.
constexpr std::uint64_t substream(std::uint64_t base, std::uint64_t tag) {
  return mix64(base ^ mix64(tag ^ 0x5851f42d4c957f2dULL));
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    // Seed expansion per the xoshiro reference: run splitmix64 over the seed.
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Unbiased uniform in [0, n); Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform integer in [lo, hi], inclusive.
  std::uint32_t uniform(std::uint32_t lo, std::uint32_t hi) {
    return lo + static_cast<std::uint32_t>(below(static_cast<std::uint64_t>(hi) - lo + 1));
  }

  // Index sampled proportionally to nonnegative weights; caller guarantees
  // a positive total.
  template <typename Container>
  std::size_t weighted(const Container& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = next_double() * total;
    std::size_t last = 0;
    std::size_t i = 0;
    for (double w : weights) {
      if (w > 0.0) {
        if (u < w) return i;
        u -= w;
        last = i;
      }
      ++i;
    }
    return last;  // float round-off: fall back to the last positive weight
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace ced
