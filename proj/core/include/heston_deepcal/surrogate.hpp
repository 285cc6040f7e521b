#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heston_deepcal/calibration.hpp"
#include "heston_deepcal/micronet.hpp"
#include "heston_deepcal/network_io.hpp"

namespace hdc {

// Surrogate features, in column order.
inline constexpr std::array<const char*, 7> kSurrogateFeatures = {"kappa", "theta",    "sigma",    "rho",
                                                                  "v0",    "maturity", "moneyness"};

enum class SamplingScheme { UniformRandom, Grid };

SamplingScheme parse_sampling_scheme(const std::string& name);
std::string to_string(SamplingScheme scheme);

struct SamplingSpec {
  ParamBounds bounds = default_param_bounds();
  std::array<double, 2> maturity_range{0.05, 1.0};     // years
  std::array<double, 2> moneyness_range{-0.3, 0.3};    // ln(S/K)
  double rate = 0.0;                                   // fixed for the whole surrogate
  std::size_t n_samples = 10000;                       // UniformRandom only
  SamplingScheme scheme = SamplingScheme::UniformRandom;
  std::size_t grid_points = 3;                         // per axis, Grid only
  std::uint64_t seed = 11;
  std::size_t threads = 0;

  void validate() const;
  std::size_t row_count() const;
};

// One synthetic observation at unit spot: price = C(K = e^{-m}) / S.
struct SurrogateSample {
  HestonParams eta;
  double maturity = 0.0;
  double moneyness = 0.0;
  double price = 0.0;

  std::array<double, 7> features() const {
    return {eta.kappa, eta.theta, eta.sigma, eta.rho, eta.v0, maturity, moneyness};
  }
  friend bool operator==(const SurrogateSample&, const SurrogateSample&) = default;
};

struct SyntheticDataset {
  std::vector<SurrogateSample> samples;
  std::size_t attempted = 0;
  std::size_t failures = 0;  // rows dropped because pricing failed
};

// Throws TooManyFailures when more than 1% of rows fail to price.
SyntheticDataset gen_synthetic(const SamplingSpec& spec, const QuadratureConfig& quad = {});

nn::Dataset to_dataset(const std::vector<SurrogateSample>& samples);

// CSV columns: kappa,theta,sigma,rho,v0,maturity,moneyness,price
std::string samples_to_csv(const std::vector<SurrogateSample>& samples);
std::vector<SurrogateSample> parse_samples_csv(const std::string& text);

struct SurrogateArch {
  std::vector<std::size_t> hidden{32, 32};
  nn::Activation activation = nn::Activation::Relu;
};

// Adam, lr 2e-3, batch 32, 200 epochs.
nn::TrainConfig default_surrogate_train_config();

struct SurrogateModel {
  nn::ScaledNetwork model;
  std::array<double, 7> feature_min{};
  std::array<double, 7> feature_max{};
  double rate = 0.0;
  double train_rmse = 0.0;       // normalized-price units
  double validation_rmse = 0.0;  // normalized-price units
  std::vector<double> loss_history;

  // Normalized prices for rows of raw features.
  std::vector<double> predict(const nn::Matrix& features) const { return model.predict(features); }

  nn::NetworkDocument to_document() const;
  static SurrogateModel from_document(const nn::NetworkDocument& doc);
};

// Samples are put in a canonical order, then split 80/20 (validation_fraction)
// with the training seed, so the result does not depend on input row order.
// Inputs and target are z-scored with scalers fit on the training rows.
// `rate` is the fixed rate the samples were priced at; it is stored with the model.
SurrogateModel train_surrogate(const std::vector<SurrogateSample>& samples, const SurrogateArch& arch,
                               const nn::TrainConfig& cfg, double rate = 0.0, double validation_fraction = 0.2);

struct ExtrapolationWarning {
  std::size_t quote_index = 0;
  std::string reason;
};

// Quotes whose maturity or log-moneyness fall outside the training ranges.
std::vector<ExtrapolationWarning> check_extrapolation(const OptionChain& chain, const SurrogateModel& surrogate);

// Batched inference over the whole chain, rescaled to currency by the spot.
ChainPricer surrogate_pricer(const SurrogateModel& surrogate);

struct SurrogateCalibration {
  CalibrationResult result;
  std::vector<ExtrapolationWarning> warnings;
  double evaluations_per_second = 0.0;
};

SurrogateCalibration surrogate_calibrate(const OptionChain& chain, const SurrogateModel& surrogate,
                                         const ParamBounds& bounds, const CalibrationWeights& weights,
                                         const DeConfig& de);

}  // namespace hdc
