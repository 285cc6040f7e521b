#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heston_deepcal/calibration.hpp"
#include "heston_deepcal/micronet.hpp"
#include "heston_deepcal/network_io.hpp"

namespace hdc {

// Price Approximator Network: strike -> last traded price, 1 -> 8 -> 8 -> 1
// with tanh on the first hidden layer and relu on the second.
struct PanModel {
  nn::ScaledNetwork model;
  std::vector<double> loss_history;
};

// Calibration Correction Network: Heston price -> corrected price,
// 1 -> 7 -> 7 -> 1 with sigmoid then tanh hidden activations.
struct CcnModel {
  nn::ScaledNetwork model;
  std::vector<double> loss_history;
};

// Kaiming-initialized, identity scalers.
PanModel build_pan(std::uint64_t seed);
CcnModel build_ccn(std::uint64_t seed);

// Adam, lr 1e-2, full batch, 5000 epochs.
nn::TrainConfig default_network_train_config();

// Needs >= 5 quotes of one maturity. Scalers are fit on the training strikes
// and prices; cfg.seed drives the initialization.
PanModel train_pan(const OptionChain& train_chain, const nn::TrainConfig& cfg);
std::vector<double> pan_curve(const PanModel& pan, std::span<const double> strikes);

// Learns model_prices[i] -> reference[i]. Needs >= 5 aligned points.
CcnModel train_ccn(std::span<const double> model_prices, std::span<const double> reference,
                   const nn::TrainConfig& cfg);
std::vector<double> apply_ccn(const CcnModel& ccn, std::span<const double> model_prices);

struct MetricsReport {
  double rmse = 0.0;
  double mae = 0.0;
  double mre = 0.0;
  std::size_t n = 0;
  std::size_t excluded_zero_price = 0;  // quotes left out of MRE
};

// RMSE, MAE over all quotes; MRE over quotes with market price > 1e-12.
MetricsReport compute_metrics(std::span<const double> model_prices, std::span<const double> market_prices);

enum class CcnTarget { Pan, Market };

CcnTarget parse_ccn_target(const std::string& name);
std::string to_string(CcnTarget target);

struct PipelineConfig {
  double test_fraction = 0.2;
  SplitStrategy split = SplitStrategy::Interleaved;
  std::uint64_t split_seed = 0;
  ParamBounds bounds = default_param_bounds();
  CalibrationWeights weights;
  MethodConfig method = DeConfig{};
  QuadratureConfig quad;
  nn::TrainConfig pan = default_network_train_config();
  nn::TrainConfig ccn = default_network_train_config();
  CcnTarget ccn_target = CcnTarget::Pan;
  // Keep the correction only if it lowers both the train MSE against its
  // targets and the train RMSE against market prices; otherwise fall back to
  // the identity map.
  bool gate_correction = true;
  // Maturity slice to use when the chain holds several; required then.
  std::optional<double> maturity_days;

  // Derives split, optimizer and network seeds from one value.
  void apply_seed(std::uint64_t seed);
  void validate() const;
};

struct CurvePoint {
  double strike = 0.0;
  bool test = false;
  double market = 0.0;
  double heston = 0.0;
  double pan = 0.0;
  double corrected = 0.0;
};

struct PipelineReport {
  MetricsReport traditional_train;
  MetricsReport traditional_test;
  MetricsReport deep_learning_train;
  MetricsReport deep_learning_test;
  CalibrationResult calibration;
  bool correction_applied = false;
  double maturity_days = 0.0;
  std::string split_spec;
  std::vector<CurvePoint> curve;  // chain order
  PanModel pan;
  CcnModel ccn;
};

// split -> calibrate on train -> price all quotes -> PAN on train -> CCN on
// train -> metrics of both methods against market prices. Errors are
// re-raised with the failing stage in brackets.
PipelineReport run_pipeline(const OptionChain& chain, const PipelineConfig& cfg);

// Deterministic JSON: no timing fields.
std::string report_to_json(const PipelineReport& report, const PipelineConfig& cfg);
std::string metrics_to_json(const MetricsReport& metrics);
// Tidy `strike,series,value` with series market|heston|pan|corrected.
std::string curves_to_csv(const PipelineReport& report);

nn::NetworkDocument pan_document(const PanModel& pan);
nn::NetworkDocument ccn_document(const CcnModel& ccn);

}  // namespace hdc
