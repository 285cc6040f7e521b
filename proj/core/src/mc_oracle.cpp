#include "heston_deepcal/mc_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/parallel.hpp"
#include "heston_deepcal/random.hpp"

namespace hdc {

namespace {

void validate_relaxed(const HestonParams& p) {
  auto non_negative = [](double x) { return x >= 0.0 && std::isfinite(x); };
  if (!non_negative(p.kappa) || !non_negative(p.theta) || !non_negative(p.sigma) || !non_negative(p.v0))
    fail(ErrorCode::InvalidParams, "Monte Carlo needs kappa, theta, sigma, v0 >= 0");
  if (!(p.rho >= -1.0 && p.rho <= 1.0)) fail(ErrorCode::InvalidParams, "rho must lie in [-1, 1]");
}

}  // namespace

void McConfig::validate() const {
  if (n_paths < 1000) fail(ErrorCode::InvalidConfig, "Monte Carlo needs at least 1000 paths");
  if (n_steps < 10) fail(ErrorCode::InvalidConfig, "Monte Carlo needs at least 10 time steps");
}

std::vector<double> simulate_log_spots(const MarketState& state, const HestonParams& params, double tau,
                                       const McConfig& cfg) {
  cfg.validate();
  state.validate();
  validate_relaxed(params);
  if (!(tau > 0.0)) fail(ErrorCode::DomainError, "tau must be > 0");

  const double dt = tau / static_cast<double>(cfg.n_steps);
  const double sqrt_dt = std::sqrt(dt);
  const double x0 = std::log(state.spot);
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho));
  std::vector<double> out(cfg.n_paths);

  parallel_for(
      cfg.n_paths,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t path = begin; path < end; ++path) {
          CounterRng rng(cfg.seed, path);
          double x = x0;
          double v = params.v0;
          for (std::size_t step = 0; step < cfg.n_steps; ++step) {
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            const double vp = std::max(v, 0.0);
            const double vol = std::sqrt(vp) * sqrt_dt;
            x += (state.rate - 0.5 * vp) * dt + vol * z1;
            v += params.kappa * (params.theta - vp) * dt +
                 params.sigma * vol * (params.rho * z1 + rho_bar * z2);
          }
          out[path] = x;
        }
      },
      cfg.threads);
  return out;
}

McEstimate summarize(std::span<const double> samples) {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : samples) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  McEstimate est;
  est.value = mean;
  est.n_paths = n;
  est.std_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return est;
}

std::vector<McEstimate> mc_call_prices(std::span<const double> strikes, const MarketState& state,
                                       const HestonParams& params, double tau, const McConfig& cfg) {
  for (double k : strikes)
    if (!(k > 0.0)) fail(ErrorCode::DomainError, "strike must be > 0");
  const auto log_spots = simulate_log_spots(state, params, tau, cfg);
  const double discount = std::exp(-state.rate * tau);
  std::vector<McEstimate> out;
  std::vector<double> payoff(log_spots.size());
  for (double k : strikes) {
    for (std::size_t i = 0; i < log_spots.size(); ++i)
      payoff[i] = discount * std::max(std::exp(log_spots[i]) - k, 0.0);
    out.push_back(summarize(payoff));
  }
  return out;
}

McEstimate mc_call_price(double strike, const MarketState& state, const HestonParams& params, double tau,
                         const McConfig& cfg) {
  const double strikes[] = {strike};
  return mc_call_prices(strikes, state, params, tau, cfg).front();
}

McEstimate mc_itm_probability(double strike, const MarketState& state, const HestonParams& params,
                              double tau, const McConfig& cfg) {
  const auto log_spots = simulate_log_spots(state, params, tau, cfg);
  const double log_strike = std::log(strike);
  std::vector<double> indicator(log_spots.size());
  for (std::size_t i = 0; i < log_spots.size(); ++i) indicator[i] = log_spots[i] > log_strike ? 1.0 : 0.0;
  return summarize(indicator);
}

McEstimate mc_share_itm_probability(double strike, const MarketState& state, const HestonParams& params,
                                    double tau, const McConfig& cfg) {
  // Weighted by S_T / (S0 e^{r tau}), the share-measure density on the sample.
  const auto log_spots = simulate_log_spots(state, params, tau, cfg);
  const double log_strike = std::log(strike);
  const double forward = state.spot * std::exp(state.rate * tau);
  std::vector<double> weighted(log_spots.size());
  for (std::size_t i = 0; i < log_spots.size(); ++i)
    weighted[i] = log_spots[i] > log_strike ? std::exp(log_spots[i]) / forward : 0.0;
  return summarize(weighted);
}

McEstimate mc_discounted_spot(const MarketState& state, const HestonParams& params, double tau,
                              const McConfig& cfg) {
  const auto log_spots = simulate_log_spots(state, params, tau, cfg);
  const double discount = std::exp(-state.rate * tau);
  std::vector<double> values(log_spots.size());
  for (std::size_t i = 0; i < log_spots.size(); ++i) values[i] = discount * std::exp(log_spots[i]);
  return summarize(values);
}

McComplexEstimate mc_char_fn(double phi, const MarketState& state, const HestonParams& params, double tau,
                             const McConfig& cfg) {
  const auto log_spots = simulate_log_spots(state, params, tau, cfg);
  std::vector<double> re(log_spots.size());
  std::vector<double> im(log_spots.size());
  for (std::size_t i = 0; i < log_spots.size(); ++i) {
    re[i] = std::cos(phi * log_spots[i]);
    im[i] = std::sin(phi * log_spots[i]);
  }
  const auto re_est = summarize(re);
  const auto im_est = summarize(im);
  return {Complex(re_est.value, im_est.value), re_est.std_error, im_est.std_error, log_spots.size()};
}

}  // namespace hdc
