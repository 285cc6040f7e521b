#pragma once

#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <heston_deepcal/calibration.hpp>
#include <heston_deepcal/hybrid_pipeline.hpp>
#include <heston_deepcal/mc_oracle.hpp>
#include <heston_deepcal/surrogate.hpp>

namespace hdc::cli {

struct GlobalOptions {
  std::size_t threads = 0;
  std::uint64_t seed = 42;
  bool quiet = false;
};

struct ParamOptions {
  HestonParams params{2.0, 0.04, 0.3, -0.7, 0.04};
};

struct BoundsOptions {
  std::vector<double> kappa, theta, sigma, rho, v0;  // empty: default axis

  ParamBounds resolve() const;
};

struct DeOptions {
  DeConfig de;
  std::string strategy = "rand1bin";
  bool seed_set = false;

  DeConfig resolve(std::uint64_t global_seed) const;
};

struct QuadOptions {
  QuadratureConfig quad;
};

struct TrainOptions {
  nn::TrainConfig cfg;
  std::string optimizer = "adam";
  bool full_batch = false;
  bool seed_set = false;

  nn::TrainConfig resolve(std::uint64_t seed) const;
};

struct ChainOptions {
  std::string csv;
  std::string meta;
};

void add_params(CLI::App& app, ParamOptions& o);
void add_bounds(CLI::App& app, BoundsOptions& o);
void add_de(CLI::App& app, DeOptions& o);
void add_quad(CLI::App& app, QuadOptions& o);
// prefix is prepended to every flag name, e.g. "pan-" -> --pan-epochs.
void add_train(CLI::App& app, TrainOptions& o, const std::string& prefix, const nn::TrainConfig& defaults);
void add_chain(CLI::App& app, ChainOptions& o, bool required = true);

OptionChain load(const ChainOptions& o);

}  // namespace hdc::cli
