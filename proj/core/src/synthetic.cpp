#include "heston_deepcal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/random.hpp"

namespace hdc {

OptionChain synthetic_chain(const MarketState& state, const HestonParams& params,
                            std::span<const double> maturity_days, std::span<const double> strikes,
                            const QuadratureConfig& quad) {
  state.validate();
  params.validate();
  if (maturity_days.empty() || strikes.empty()) fail(ErrorCode::EmptyChain, "synthetic chain needs maturities and strikes");
  std::vector<OptionQuote> quotes;
  quotes.reserve(maturity_days.size() * strikes.size());
  for (double days : maturity_days) {
    if (!(days > 0.0)) fail(ErrorCode::DomainError, "maturity must be positive");
    const SlicePricer slice(state, params, days / kDaysPerYear, quad);
    for (double k : strikes) {
      if (!(k > 0.0)) fail(ErrorCode::NonPositiveStrike, "strike must be positive");
      quotes.push_back({k, days, slice.price(k).price});
    }
  }
  return OptionChain(state, std::move(quotes));
}

OptionChain perturb_with_smile(const OptionChain& chain, double amplitude) {
  if (!std::isfinite(amplitude)) fail(ErrorCode::InvalidConfig, "smile amplitude must be finite");
  const double spot = chain.state().spot;
  std::map<double, double> m_max;
  for (const auto& q : chain.quotes()) {
    double& mm = m_max[q.maturity_days];
    mm = std::max(mm, std::abs(log_moneyness(spot, q.strike)));
  }
  std::vector<OptionQuote> quotes(chain.quotes().begin(), chain.quotes().end());
  for (auto& q : quotes) {
    const double mm = m_max[q.maturity_days];
    const double x = mm > 0.0 ? log_moneyness(spot, q.strike) / mm : 0.0;
    q.last_price = std::max(0.0, q.last_price + amplitude * spot * x * x);
  }
  return chain.with_quotes(std::move(quotes));
}

OptionChain perturb_with_noise(const OptionChain& chain, double scale, std::uint64_t seed) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) fail(ErrorCode::InvalidConfig, "noise scale must be >= 0");
  CounterRng rng(seed, 0x4015E);
  std::vector<OptionQuote> quotes(chain.quotes().begin(), chain.quotes().end());
  for (auto& q : quotes) q.last_price = std::max(0.0, q.last_price + scale * rng.normal());
  return chain.with_quotes(std::move(quotes));
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

}  // namespace hdc
