#pragma once

#include <cmath>
#include <cstdint>

namespace jumpctrl {

// Counter-based stream RNG (Philox4x32-10). A draw sequence is fully
// determined by (seed, stream); distinct streams are statistically
// independent, so parallel workers can consume disjoint streams without
// coordination and results do not depend on scheduling.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream), counter_(0), have_(0) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() {
    if (have_ == 0) refill();
    std::uint64_t lo = buf_[--have_];
    std::uint64_t hi = buf_[--have_];
    return (hi << 32) | lo;
  }

  // uniform in [0,1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform in (0,1); never returns an exact endpoint
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Exp(rate) waiting time, strictly positive
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  // Poisson(mean). Product-of-uniforms for small means, Lorentzian
  // rejection for large ones; exact in both regimes.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 12.0) {
      const double limit = std::exp(-mean);
      double prod = 1.0;
      std::uint64_t k = 0;
      for (;;) {
        prod *= uniform01();
        if (prod <= limit) return k;
        ++k;
      }
    }
    const double sq = std::sqrt(2.0 * mean);
    const double alxm = std::log(mean);
    const double g = mean * alxm - std::lgamma(mean + 1.0);
    for (;;) {
      double y, em;
      do {
        y = std::tan(3.14159265358979323846 * uniform_open());
        em = sq * y + mean;
      } while (!(em >= 0.0) || !std::isfinite(em));
      em = std::floor(em);
      const double t = 0.9 * (1.0 + y * y) * std::exp(em * alxm - std::lgamma(em + 1.0) - g);
      if (uniform01() <= t) return static_cast<std::uint64_t>(em);
    }
  }

  // uniform integer in [0, n), unbiased
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * c0;
      const std::uint64_t p1 = 0xCD9E8D57ull * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buf_[0] = c0; buf_[1] = c1; buf_[2] = c2; buf_[3] = c3;
    have_ = 4;
    ++counter_;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
  std::uint32_t buf_[4];
  int have_;
};

// splitmix64 finalizer; used to derive stream indices from structured
// task coordinates so that every (phase, stage, state, control, path)
// tuple owns a distinct stream regardless of scheduling.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_index(std::uint64_t phase, std::uint64_t a = 0,
                                  std::uint64_t b = 0, std::uint64_t c = 0,
                                  std::uint64_t d = 0) {
  std::uint64_t h = mix64(phase);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  h = mix64(h ^ d);
  return h;
}

// Stream-derivation phases. Values are arbitrary but frozen: changing
// them changes every sampled trajectory.
namespace phase {
inline constexpr std::uint64_t kSimulate = 1;
inline constexpr std::uint64_t kRank = 2;
inline constexpr std::uint64_t kStats = 3;
inline constexpr std::uint64_t kStageSets = 4;
inline constexpr std::uint64_t kFeedbackDp = 5;
inline constexpr std::uint64_t kHybridDp = 6;
inline constexpr std::uint64_t kEvaluate = 7;
inline constexpr std::uint64_t kBounds = 8;
inline constexpr std::uint64_t kDiscounted = 9;
}  // namespace phase

}  // namespace jumpctrl
