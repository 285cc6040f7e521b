#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "heston_deepcal/heston_pricer.hpp"

namespace hdc {

enum class McScheme { EulerFullTruncation };

struct McConfig {
  std::size_t n_paths = 200000;
  std::size_t n_steps = 200;
  std::uint64_t seed = 42;
  McScheme scheme = McScheme::EulerFullTruncation;
  std::size_t threads = 0;  // 0: default_threads(); never changes the estimate

  // n_paths >= 1000, n_steps >= 10.
  void validate() const;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

struct McComplexEstimate {
  Complex value;
  double std_error_real = 0.0;
  double std_error_imag = 0.0;
  std::size_t n_paths = 0;
};

// Terminal log-spots from an Euler full-truncation scheme:
//   v+ = max(v, 0)
//   x += (r - v+/2) dt + sqrt(v+ dt) Z1
//   v += kappa (theta - v+) dt + sigma sqrt(v+ dt) (rho Z1 + sqrt(1 - rho^2) Z2)
// Path p draws from CounterRng(seed, p), so the result is independent of the
// worker layout. Parameter checks are relaxed to kappa, theta, sigma, v0 >= 0.
std::vector<double> simulate_log_spots(const MarketState& state, const HestonParams& params, double tau,
                                       const McConfig& cfg);

McEstimate mc_call_price(double strike, const MarketState& state, const HestonParams& params, double tau,
                         const McConfig& cfg);

// One set of paths shared by every strike.
std::vector<McEstimate> mc_call_prices(std::span<const double> strikes, const MarketState& state,
                                       const HestonParams& params, double tau, const McConfig& cfg);

// Pr[S_T > K] under the pricing measure.
McEstimate mc_itm_probability(double strike, const MarketState& state, const HestonParams& params,
                              double tau, const McConfig& cfg);

// Pr[S_T > K] under the share measure, i.e. E[S_T 1{S_T > K}] / E[S_T].
McEstimate mc_share_itm_probability(double strike, const MarketState& state, const HestonParams& params,
                                    double tau, const McConfig& cfg);

// Sample mean of e^{-r tau} S_T.
McEstimate mc_discounted_spot(const MarketState& state, const HestonParams& params, double tau,
                              const McConfig& cfg);

// Sample mean of exp(i phi ln S_T).
McComplexEstimate mc_char_fn(double phi, const MarketState& state, const HestonParams& params, double tau,
                             const McConfig& cfg);

// Mean and standard error of a sample, via Welford accumulation.
McEstimate summarize(std::span<const double> samples);

}  // namespace hdc
