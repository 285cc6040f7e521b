#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "heston_deepcal/heston_pricer.hpp"
#include "heston_deepcal/market_data.hpp"
#include "heston_deepcal/optimizers.hpp"

namespace hdc {

// Box over (kappa, theta, sigma, rho, v0).
using ParamBounds = Bounds;

// kappa [0.1, 10], theta [0.001, 1], sigma [0.01, 2], rho [-0.99, 0.99], v0 [0.001, 1].
ParamBounds default_param_bounds();
// Bounds check on top of Bounds::validate(): 5 axes, rho within [-1, 1], others positive.
void validate_param_bounds(const ParamBounds& bounds);

enum class WeightMode { Uniform, InversePrice, Custom };

WeightMode parse_weight_mode(const std::string& name);
std::string to_string(WeightMode mode);

struct CalibrationWeights {
  WeightMode mode = WeightMode::Uniform;
  std::vector<double> custom;  // one positive weight per quote, for Custom
  double price_floor = 0.01;   // InversePrice uses 1 / max(V_mkt, floor)

  // Positive weights normalized to sum to 1, one per quote.
  std::vector<double> resolve(const OptionChain& chain) const;
};

// Model prices for every quote of the chain, in chain order.
using ChainPricer = std::function<std::vector<double>(const HestonParams&, const OptionChain&)>;
// Model price of one quote.
using QuotePricer = std::function<double(const HestonParams&, const OptionQuote&, const MarketState&)>;

// Analytic characteristic-function pricer over the chain.
ChainPricer analytic_pricer(const QuadratureConfig& quad = {});
ChainPricer per_quote_pricer(QuotePricer pricer);

// J(eta) = sqrt(sum_q w_q (V_model - V_mkt)^2) with normalized weights.
// Invalid parameters and pricing failures map to +infinity.
Objective make_objective(const OptionChain& chain, const CalibrationWeights& weights, ChainPricer pricer);

double weighted_rmse(std::span<const double> model, std::span<const double> market,
                     std::span<const double> weights);

enum class CalibrationMethod { NelderMead, DifferentialEvolution };

CalibrationMethod parse_calibration_method(const std::string& name);
std::string to_string(CalibrationMethod method);

struct NelderMeadSettings {
  NmConfig config;
  std::optional<HestonParams> start;  // midpoint of the bounds when unset
};

using MethodConfig = std::variant<NelderMeadSettings, DeConfig>;

struct CalibrationResult {
  HestonParams params;
  double objective = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::string method;
  bool converged = false;
  double wall_seconds = 0.0;
  std::vector<double> best_history;
};

// Runs the optimizer selected by the active alternative of `config`.
CalibrationResult calibrate_with(const Objective& objective, const ParamBounds& bounds,
                                 const MethodConfig& config);

CalibrationResult calibrate(const OptionChain& chain, const ParamBounds& bounds,
                            const CalibrationWeights& weights, const MethodConfig& config,
                            const QuadratureConfig& quad = {});

}  // namespace hdc
