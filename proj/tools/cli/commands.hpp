#pragma once

#include "options.hpp"

namespace hdc::cli {

struct PriceCommand {
  ParamOptions params;
  QuadOptions quad;
  double spot = 100.0;
  double rate = 0.03;
  std::vector<double> strikes{100.0};
  double maturity = 0.5;
  std::optional<double> bs_vol;
  std::string format = "text";

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct McCheckCommand {
  ParamOptions params;
  QuadOptions quad;
  double spot = 100.0;
  double rate = 0.03;
  std::vector<double> strikes{80.0, 90.0, 100.0, 110.0, 120.0};
  double maturity = 0.5;
  std::size_t paths = 200000;
  std::size_t steps = 200;
  double n_se = 3.0;

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct CalibrateCommand {
  ChainOptions chain;
  BoundsOptions bounds;
  DeOptions de;
  QuadOptions quad;
  std::string method = "de";
  std::string weights = "uniform";
  std::string out;
  std::string curve;
  std::size_t nm_iters = 5000;

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct SurrogateGenCommand {
  BoundsOptions bounds;
  QuadOptions quad;
  std::string scheme = "uniform";
  std::size_t samples = 10000;
  std::size_t grid_points = 3;
  std::vector<double> maturity_range{0.05, 1.0};
  std::vector<double> moneyness_range{-0.3, 0.3};
  double rate = 0.0;
  std::string out;

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct SurrogateTrainCommand {
  TrainOptions train;
  std::string data;
  std::string out;
  std::vector<std::size_t> hidden{32, 32};
  std::string activation = "relu";
  double validation_fraction = 0.2;
  double rate = 0.0;

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct SurrogateCalibrateCommand {
  ChainOptions chain;
  BoundsOptions bounds;
  DeOptions de;
  std::string network;
  std::string weights = "uniform";
  std::string out;

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct PanTrainCommand {
  ChainOptions chain;
  TrainOptions train;
  std::optional<double> maturity_days;
  std::string out;
  std::string curve;
  std::size_t curve_points = 200;

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct PipelineCommand {
  ChainOptions chain;
  BoundsOptions bounds;
  DeOptions de;
  QuadOptions quad;
  TrainOptions pan;
  TrainOptions ccn;
  std::optional<double> maturity_days;
  double test_fraction = 0.2;
  std::string split = "interleaved";
  std::string method = "de";
  std::string weights = "uniform";
  std::string ccn_target = "pan";
  bool no_gate = false;
  std::string report;
  std::string curves;

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct MetricsCommand {
  std::string file;
  std::string model_column = "model";
  std::string market_column = "market";

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

struct SynthChainCommand {
  ParamOptions params;
  QuadOptions quad;
  double spot = 100.0;
  double rate = 0.03;
  std::string as_of = "2025-01-02";
  std::vector<double> days{182.0};
  std::vector<double> strike_grid{80.0, 120.0, 20.0};
  double smile = 0.0;
  double noise = 0.0;
  std::string out;

  void attach(CLI::App& app);
  int run(const GlobalOptions& g) const;
};

}  // namespace hdc::cli
