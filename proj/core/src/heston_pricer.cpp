#include "heston_deepcal/heston_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/quadrature.hpp"

namespace hdc {

namespace {

constexpr Complex kI{0.0, 1.0};

// log(1 + z) on the principal branch without cancellation for small |z|.
Complex log1p_complex(Complex z) {
  const double re = 0.5 * std::log1p(2.0 * z.real() + std::norm(z));
  const double im = std::atan2(z.imag(), 1.0 + z.real());
  return {re, im};
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double clamp_probability(double p, int j) {
  constexpr double kSlack = 1e-9;
  if (!std::isfinite(p) || p < -kSlack || p > 1.0 + kSlack) {
    std::ostringstream msg;
    msg << "P" << j << " = " << p
        << " outside [0, 1]; increase the integration upper limit or node count";
    fail(ErrorCode::QuadratureFailure, msg.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

void HestonParams::validate() const {
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  if (!positive(kappa)) fail(ErrorCode::InvalidParams, "kappa must be > 0");
  if (!positive(theta)) fail(ErrorCode::InvalidParams, "theta must be > 0");
  if (!positive(sigma)) fail(ErrorCode::InvalidParams, "sigma must be > 0");
  if (!positive(v0)) fail(ErrorCode::InvalidParams, "v0 must be > 0");
  if (!(rho >= -1.0 && rho <= 1.0)) fail(ErrorCode::InvalidParams, "rho must lie in [-1, 1]");
}

void QuadratureConfig::validate() const {
  if (nodes < 64) fail(ErrorCode::InvalidConfig, "quadrature needs at least 64 nodes");
  if (!(lower_offset > 0.0)) fail(ErrorCode::InvalidConfig, "quadrature lower_offset must be > 0");
  if (!(upper_limit > lower_offset) || !std::isfinite(upper_limit))
    fail(ErrorCode::InvalidConfig, "quadrature upper_limit must exceed lower_offset");
}

RiccatiTerms riccati_terms(Complex phi, double tau, const HestonParams& p) {
  if (!(tau >= 0.0)) fail(ErrorCode::DomainError, "tau must be >= 0");
  const double s2 = p.sigma * p.sigma;
  const Complex b = p.kappa - p.rho * p.sigma * kI * phi;
  const Complex u = kI * phi + phi * phi;
  const Complex d = std::sqrt(b * b + s2 * u);

  Complex b_plus = b + d;
  Complex b_minus = b - d;
  Complex q;  // (b - d) / sigma^2
  if (std::abs(b_plus) >= std::abs(b_minus)) {
    b_minus = -s2 * u / b_plus;
    q = -u / b_plus;
  } else {
    b_plus = -s2 * u / b_minus;
    q = b_minus / s2;
  }
  const Complex g = b_minus / b_plus;
  // e^{-d tau} = e^{-a tau} w with d = a + i b, w = e^{-i b tau}; 1 - e^{-d tau} is
  // assembled from expm1 and half-angle terms so tau -> 0 keeps full precision.
  const double angle = d.imag() * tau;
  const Complex w = std::polar(1.0, -angle);
  const Complex e = std::exp(-d.real() * tau) * w;
  const double half_sin = std::sin(0.5 * angle);
  const Complex one_minus_w(2.0 * half_sin * half_sin, std::sin(angle));
  const Complex one_minus_e = one_minus_w - w * std::expm1(-d.real() * tau);
  const Complex d_term = q * one_minus_e / (1.0 - g * e);
  const Complex log_ratio = log1p_complex(g * one_minus_e / (1.0 - g));
  const Complex c_term = p.kappa * p.theta * (q * tau - 2.0 / s2 * log_ratio);

  if (!finite(c_term) || !finite(d_term)) {
    std::ostringstream msg;
    msg << "Riccati terms not finite at phi=" << phi << ", tau=" << tau;
    fail(ErrorCode::NumericalOverflow, msg.str());
  }
  return {c_term, d_term};
}

Complex log_char_fn(Complex phi, const MarketState& state, const HestonParams& params, double tau) {
  const auto [c, d] = riccati_terms(phi, tau, params);
  return kI * phi * (std::log(state.spot) + state.rate * tau) + c + d * params.v0;
}

Complex char_fn(Complex phi, const MarketState& state, const HestonParams& params, double tau) {
  const Complex value = std::exp(log_char_fn(phi, state, params, tau));
  if (!finite(value)) fail(ErrorCode::NumericalOverflow, "characteristic function overflow");
  return value;
}

SlicePricer::SlicePricer(const MarketState& state, const HestonParams& params, double tau,
                         const QuadratureConfig& quad)
    : state_(state), tau_(tau) {
  params.validate();
  quad.validate();
  if (!(tau > 0.0)) fail(ErrorCode::DomainError, "tau must be > 0");
  auto rule = gauss_legendre_on(quad.nodes, quad.lower_offset, quad.upper_limit);
  nodes_ = std::move(rule.nodes);
  weights_ = std::move(rule.weights);
  share_cf_.resize(nodes_.size());
  pricing_cf_.resize(nodes_.size());

  // Relative to e^{i phi ln S}: f(phi - i) / f(-i) -> exp(i phi r tau + C(phi - i) + D(phi - i) v0)
  // and f(phi) -> exp(i phi r tau + C(phi) + D(phi) v0).
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const double phi = nodes_[n];
    const Complex drift = kI * phi * state.rate * tau;
    const auto shifted = riccati_terms(Complex(phi, -1.0), tau, params);
    const auto plain = riccati_terms(Complex(phi, 0.0), tau, params);
    share_cf_[n] = std::exp(drift + shifted.c_term + shifted.d_term * params.v0);
    pricing_cf_[n] = std::exp(drift + plain.c_term + plain.d_term * params.v0);
    if (!finite(share_cf_[n]) || !finite(pricing_cf_[n]))
      fail(ErrorCode::NumericalOverflow, "characteristic function overflow at the quadrature nodes");
  }
}

CallPriceDetail SlicePricer::price(double strike) const {
  if (!(strike > 0.0)) fail(ErrorCode::DomainError, "strike must be > 0");
  const double m = std::log(state_.spot / strike);
  // Re[e^{-i phi ln K} F / (i phi)] = Im[e^{i phi m} G] / phi with F = e^{i phi ln S} G.
  double integral1 = 0.0;
  double integral2 = 0.0;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const double phi = nodes_[n];
    const double c = std::cos(phi * m);
    const double s = std::sin(phi * m);
    const Complex& g1 = share_cf_[n];
    const Complex& g2 = pricing_cf_[n];
    integral1 += weights_[n] * (c * g1.imag() + s * g1.real()) / phi;
    integral2 += weights_[n] * (c * g2.imag() + s * g2.real()) / phi;
  }
  CallPriceDetail out;
  out.p1 = clamp_probability(0.5 + integral1 / std::numbers::pi, 1);
  out.p2 = clamp_probability(0.5 + integral2 / std::numbers::pi, 2);
  const double discounted_strike = strike * std::exp(-state_.rate * tau_);
  const double raw = state_.spot * out.p1 - discounted_strike * out.p2;
  out.price = std::clamp(raw, std::max(state_.spot - discounted_strike, 0.0), state_.spot);
  return out;
}

double risk_neutral_prob(int j, double strike, const MarketState& state, const HestonParams& params,
                         double tau, const QuadratureConfig& quad) {
  if (j != 1 && j != 2) fail(ErrorCode::DomainError, "probability index must be 1 or 2");
  const auto detail = call_price_detail(strike, state, params, tau, quad);
  return j == 1 ? detail.p1 : detail.p2;
}

CallPriceDetail call_price_detail(double strike, const MarketState& state, const HestonParams& params,
                                  double tau, const QuadratureConfig& quad) {
  if (!(strike > 0.0)) fail(ErrorCode::DomainError, "strike must be > 0");
  return SlicePricer(state, params, tau, quad).price(strike);
}

double call_price(double strike, const MarketState& state, const HestonParams& params, double tau,
                  const QuadratureConfig& quad) {
  return call_price_detail(strike, state, params, tau, quad).price;
}

double bs_call(double strike, const MarketState& state, double vol, double tau) {
  if (!(vol > 0.0)) fail(ErrorCode::DomainError, "Black-Scholes volatility must be > 0");
  if (!(tau > 0.0)) fail(ErrorCode::DomainError, "tau must be > 0");
  if (!(strike > 0.0)) fail(ErrorCode::DomainError, "strike must be > 0");
  const double sd = vol * std::sqrt(tau);
  const double d1 = (std::log(state.spot / strike) + (state.rate + 0.5 * vol * vol) * tau) / sd;
  const double d2 = d1 - sd;
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  return state.spot * cdf(d1) - strike * std::exp(-state.rate * tau) * cdf(d2);
}

std::vector<PricedQuote> price_chain(const OptionChain& chain, const HestonParams& params,
                                     const QuadratureConfig& quad) {
  std::vector<PricedQuote> out;
  out.reserve(chain.size());
  std::vector<std::string> failures;
  std::map<double, std::shared_ptr<SlicePricer>> slices;
  std::map<double, Error> slice_errors;
  ErrorCode first_code = ErrorCode::NumericalOverflow;

  for (const auto& q : chain.quotes()) {
    PricedQuote priced{q, std::nan("")};
    try {
      if (const auto it = slice_errors.find(q.maturity_days); it != slice_errors.end()) throw it->second;
      auto& slice = slices[q.maturity_days];
      if (!slice) {
        try {
          slice = std::make_shared<SlicePricer>(chain.state(), params, q.maturity(), quad);
        } catch (const Error& e) {
          slice_errors.emplace(q.maturity_days, e);
          throw;
        }
      }
      priced.model_price = slice->price(q.strike).price;
    } catch (const Error& e) {
      if (failures.empty()) first_code = e.code();
      std::ostringstream msg;
      msg << "quote (maturity_days=" << q.maturity_days << ", strike=" << q.strike << "): " << e.what();
      failures.push_back(msg.str());
    }
    out.push_back(priced);
  }
  if (!failures.empty()) {
    std::string message = std::to_string(failures.size()) + " quote(s) failed to price";
    for (const auto& f : failures) message += "\n  " + f;
    fail(first_code, message);
  }
  return out;
}

std::vector<double> model_prices(const OptionChain& chain, const HestonParams& params,
                                 const QuadratureConfig& quad) {
  std::vector<double> out;
  out.reserve(chain.size());
  for (const auto& p : price_chain(chain, params, quad)) out.push_back(p.model_price);
  return out;
}

}  // namespace hdc
