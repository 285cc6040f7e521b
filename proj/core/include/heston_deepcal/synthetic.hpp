#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "heston_deepcal/heston_pricer.hpp"
#include "heston_deepcal/market_data.hpp"

namespace hdc {

// Chain of analytic Heston call prices on the (maturity, strike) grid.
OptionChain synthetic_chain(const MarketState& state, const HestonParams& params,
                            std::span<const double> maturity_days, std::span<const double> strikes,
                            const QuadratureConfig& quad = {});

// Adds a smooth smile bump to every quote:
//   bump(K) = amplitude * S * (m / m_max)^2,  m = ln(S / K)
// with m_max the largest |m| in the quote's maturity slice. amplitude = 0.02
// gives a 2% spot-scaled bump at the slice wings.
OptionChain perturb_with_smile(const OptionChain& chain, double amplitude);

// Adds independent normal noise with standard deviation `scale` to every
// price, floored at zero.
OptionChain perturb_with_noise(const OptionChain& chain, double scale, std::uint64_t seed);

// `count` strikes evenly spaced on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace hdc
