#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "heston_deepcal/market_data.hpp"

namespace hdc {

using Complex = std::complex<double>;

// Heston model parameters under the pricing measure.
//   dS = r S dt + sqrt(v) S dW1
//   dv = kappa (theta - v) dt + sigma sqrt(v) dW2,   d<W1, W2> = rho dt
struct HestonParams {
  double kappa = 0.0;  // mean-reversion speed, 1/year
  double theta = 0.0;  // long-run variance
  double sigma = 0.0;  // volatility of variance
  double rho = 0.0;    // spot/variance correlation
  double v0 = 0.0;     // initial variance

  // kappa, theta, sigma, v0 > 0 and rho in [-1, 1]. Throws InvalidParams.
  void validate() const;
  // Reported only; never enforced.
  bool feller_satisfied() const noexcept { return 2.0 * kappa * theta > sigma * sigma; }

  std::array<double, 5> to_array() const noexcept { return {kappa, theta, sigma, rho, v0}; }
  static HestonParams from_array(const double* x) noexcept { return {x[0], x[1], x[2], x[3], x[4]}; }

  friend bool operator==(const HestonParams&, const HestonParams&) = default;
};

inline constexpr std::array<const char*, 5> kParamNames = {"kappa", "theta", "sigma", "rho", "v0"};

// Truncated Fourier-inversion integral: fixed-node Gauss-Legendre on
// [lower_offset, upper_limit].
struct QuadratureConfig {
  double upper_limit = 200.0;
  std::size_t nodes = 1000;
  double lower_offset = 1e-8;

  void validate() const;
};

// C(tau, phi) and D(tau, phi) of the log-spot characteristic function,
// excluding the deterministic i*phi*r*tau drift (added by char_fn).
struct RiccatiTerms {
  Complex c_term;
  Complex d_term;
};

// Closed form in the e^{-d tau} ("little trap") arrangement:
//   b = kappa - rho sigma i phi,  d = sqrt(b^2 + sigma^2 (i phi + phi^2))
//   g = (b - d) / (b + d)
//   D = (b - d)/sigma^2 * (1 - e^{-d tau}) / (1 - g e^{-d tau})
//   C = kappa theta / sigma^2 * [(b - d) tau - 2 log((1 - g e^{-d tau}) / (1 - g))]
// b - d is formed from (b - d)(b + d) = -sigma^2 (i phi + phi^2) whenever the
// direct difference would cancel, so small sigma stays accurate.
RiccatiTerms riccati_terms(Complex phi, double tau, const HestonParams& params);

// log E[exp(i phi ln S_T)] = i phi (ln S + r tau) + C + D v0.
Complex log_char_fn(Complex phi, const MarketState& state, const HestonParams& params, double tau);
Complex char_fn(Complex phi, const MarketState& state, const HestonParams& params, double tau);

struct CallPriceDetail {
  double price = 0.0;
  double p1 = 0.0;  // ITM probability under the share measure
  double p2 = 0.0;  // ITM probability under the pricing measure
};

// Characteristic-function values at the quadrature nodes for one
// (state, params, tau). Strike enters only through a phase, so one instance
// prices every strike of a maturity slice.
class SlicePricer {
 public:
  SlicePricer(const MarketState& state, const HestonParams& params, double tau,
              const QuadratureConfig& quad = {});

  CallPriceDetail price(double strike) const;

 private:
  MarketState state_;
  double tau_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<Complex> share_cf_;    // f(phi - i) / (f(-i) e^{i phi ln S})
  std::vector<Complex> pricing_cf_;  // f(phi) / e^{i phi ln S}
};

// j = 1: share-measure probability, j = 2: pricing-measure probability.
double risk_neutral_prob(int j, double strike, const MarketState& state, const HestonParams& params,
                         double tau, const QuadratureConfig& quad = {});

// S P1 - K e^{-r tau} P2.
double call_price(double strike, const MarketState& state, const HestonParams& params, double tau,
                  const QuadratureConfig& quad = {});
CallPriceDetail call_price_detail(double strike, const MarketState& state, const HestonParams& params,
                                  double tau, const QuadratureConfig& quad = {});

double bs_call(double strike, const MarketState& state, double vol, double tau);

struct PricedQuote {
  OptionQuote quote;
  double model_price = 0.0;
};

// One model price per quote, in chain order. Failing quotes are collected and
// reported together in a single error.
std::vector<PricedQuote> price_chain(const OptionChain& chain, const HestonParams& params,
                                     const QuadratureConfig& quad = {});
std::vector<double> model_prices(const OptionChain& chain, const HestonParams& params,
                                 const QuadratureConfig& quad = {});

}  // namespace hdc
