#include "heston_deepcal/calibration.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "heston_deepcal/error.hpp"

namespace hdc {

ParamBounds default_param_bounds() {
  return {{0.1, 0.001, 0.01, -0.99, 0.001}, {10.0, 1.0, 2.0, 0.99, 1.0}};
}

void validate_param_bounds(const ParamBounds& bounds) {
  bounds.validate();
  if (bounds.dim() != 5) fail(ErrorCode::InvalidConfig, "Heston bounds need 5 axes");
  for (std::size_t i : {0, 1, 2, 4})
    if (!(bounds.lower[i] > 0.0))
      fail(ErrorCode::InvalidConfig, std::string("lower bound of ") + kParamNames[i] + " must be > 0");
  if (bounds.lower[3] < -1.0 || bounds.upper[3] > 1.0)
    fail(ErrorCode::InvalidConfig, "rho bounds must lie within [-1, 1]");
}

WeightMode parse_weight_mode(const std::string& name) {
  if (name == "uniform") return WeightMode::Uniform;
  if (name == "inverse-price" || name == "inverse_price") return WeightMode::InversePrice;
  if (name == "custom") return WeightMode::Custom;
  fail(ErrorCode::InvalidConfig, "unknown weight mode '" + name + "' (uniform|inverse-price|custom)");
}

std::string to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::Uniform: return "uniform";
    case WeightMode::InversePrice: return "inverse-price";
    case WeightMode::Custom: return "custom";
  }
  return "uniform";
}

std::vector<double> CalibrationWeights::resolve(const OptionChain& chain) const {
  std::vector<double> w(chain.size(), 1.0);
  switch (mode) {
    case WeightMode::Uniform:
      break;
    case WeightMode::InversePrice:
      if (!(price_floor > 0.0)) fail(ErrorCode::InvalidConfig, "inverse-price weights need a positive floor");
      for (std::size_t i = 0; i < chain.size(); ++i) w[i] = 1.0 / std::max(chain[i].last_price, price_floor);
      break;
    case WeightMode::Custom:
      if (custom.size() != chain.size())
        fail(ErrorCode::LengthMismatch, "custom weights need one entry per quote");
      w = custom;
      break;
  }
  for (double x : w)
    if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorCode::InvalidConfig, "weights must be positive and finite");
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

ChainPricer analytic_pricer(const QuadratureConfig& quad) {
  return [quad](const HestonParams& params, const OptionChain& chain) {
    return model_prices(chain, params, quad);
  };
}

ChainPricer per_quote_pricer(QuotePricer pricer) {
  return [pricer = std::move(pricer)](const HestonParams& params, const OptionChain& chain) {
    std::vector<double> out;
    out.reserve(chain.size());
    for (const auto& q : chain.quotes()) out.push_back(pricer(params, q, chain.state()));
    return out;
  };
}

double weighted_rmse(std::span<const double> model, std::span<const double> market,
                     std::span<const double> weights) {
  if (model.size() != market.size() || model.size() != weights.size())
    fail(ErrorCode::LengthMismatch, "weighted RMSE inputs differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double r = model[i] - market[i];
    sum += weights[i] * r * r;
  }
  return std::sqrt(sum);
}

Objective make_objective(const OptionChain& chain, const CalibrationWeights& weights, ChainPricer pricer) {
  auto w = weights.resolve(chain);
  auto market = chain.last_prices();
  return [chain, w = std::move(w), market = std::move(market),
          pricer = std::move(pricer)](std::span<const double> x) -> double {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (x.size() != 5) return kInf;
    const HestonParams params = HestonParams::from_array(x.data());
    try {
      params.validate();
      const auto model = pricer(params, chain);
      if (model.size() != market.size()) return kInf;
      const double j = weighted_rmse(model, market, w);
      return std::isfinite(j) ? j : kInf;
    } catch (const Error&) {
      return kInf;
    }
  };
}

CalibrationMethod parse_calibration_method(const std::string& name) {
  if (name == "de" || name == "differential-evolution") return CalibrationMethod::DifferentialEvolution;
  if (name == "nelder-mead" || name == "nelder_mead" || name == "nm") return CalibrationMethod::NelderMead;
  fail(ErrorCode::InvalidConfig, "unknown calibration method '" + name + "' (de|nelder-mead)");
}

std::string to_string(CalibrationMethod method) {
  return method == CalibrationMethod::DifferentialEvolution ? "de" : "nelder-mead";
}

CalibrationResult calibrate_with(const Objective& objective, const ParamBounds& bounds,
                                 const MethodConfig& config) {
  validate_param_bounds(bounds);
  const auto started = std::chrono::steady_clock::now();
  OptimResult raw;
  CalibrationResult result;
  if (const auto* nm = std::get_if<NelderMeadSettings>(&config)) {
    std::vector<double> start(5);
    if (nm->start) {
      const auto arr = nm->start->to_array();
      start.assign(arr.begin(), arr.end());
    } else {
      for (std::size_t i = 0; i < 5; ++i) start[i] = 0.5 * (bounds.lower[i] + bounds.upper[i]);
    }
    raw = nelder_mead(objective, start, nm->config, bounds);
    result.method = "nelder-mead";
  } else {
    raw = differential_evolution(objective, bounds, std::get<DeConfig>(config));
    result.method = "de";
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.params = HestonParams::from_array(raw.x.data());
  result.objective = raw.value;
  result.evaluations = raw.evaluations;
  result.iterations = raw.iterations;
  result.converged = raw.converged;
  result.best_history = std::move(raw.best_history);
  return result;
}

CalibrationResult calibrate(const OptionChain& chain, const ParamBounds& bounds,
                            const CalibrationWeights& weights, const MethodConfig& config,
                            const QuadratureConfig& quad) {
  quad.validate();
  return calibrate_with(make_objective(chain, weights, analytic_pricer(quad)), bounds, config);
}

}  // namespace hdc
