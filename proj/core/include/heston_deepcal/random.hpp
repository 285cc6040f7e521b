#pragma once

#include <cstdint>

namespace hdc {

// SplitMix64 output function. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Key for an independent stream derived from (seed, stream index).
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) noexcept;

// Counter-based generator: the n-th word of a stream is
//   mix64(key + (n + 1) * 0x9E3779B97F4A7C15)
// so any draw is addressable by (seed, stream, counter) alone. Results do not
// depend on the standard library, the platform or the thread layout.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  // Standard normal via the inverse-CDF transform of uniform().
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Wichura's AS241 (PPND16); relative accuracy about 1e-16 on (0, 1).
double inverse_normal_cdf(double p) noexcept;

double normal_cdf(double x) noexcept;

}  // namespace hdc
