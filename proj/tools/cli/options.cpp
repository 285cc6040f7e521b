#include "options.hpp"

#include <limits>

#include <heston_deepcal/error.hpp>

namespace hdc::cli {

namespace {

void add_pair(CLI::App& app, const std::string& name, std::vector<double>& target, const std::string& help) {
  app.add_option(name, target, help)->expected(2)->delimiter(',')->type_name("LO,HI");
}

}  // namespace

ParamBounds BoundsOptions::resolve() const {
  ParamBounds b = default_param_bounds();
  const std::vector<double>* axes[] = {&kappa, &theta, &sigma, &rho, &v0};
  for (std::size_t i = 0; i < 5; ++i) {
    if (axes[i]->empty()) continue;
    b.lower[i] = (*axes[i])[0];
    b.upper[i] = (*axes[i])[1];
  }
  validate_param_bounds(b);
  return b;
}

DeConfig DeOptions::resolve(std::uint64_t global_seed) const {
  DeConfig out = de;
  out.strategy = parse_de_strategy(strategy);
  if (!seed_set) out.seed = global_seed;
  out.validate();
  return out;
}

nn::TrainConfig TrainOptions::resolve(std::uint64_t seed) const {
  nn::TrainConfig out = cfg;
  out.optimizer = nn::parse_optimizer(optimizer);
  if (full_batch) out.batch_size = std::numeric_limits<std::size_t>::max();
  if (!seed_set) out.seed = seed;
  out.validate();
  return out;
}

void add_params(CLI::App& app, ParamOptions& o) {
  auto& p = o.params;
  app.add_option("--kappa", p.kappa, "mean-reversion speed kappa (1/year)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--theta", p.theta, "long-run variance theta (variance, 1/year)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--sigma", p.sigma, "volatility of variance sigma (1/sqrt(year))")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--rho", p.rho, "spot/variance correlation rho (dimensionless, [-1, 1])")->capture_default_str()->check(CLI::Range(-1.0, 1.0));
  app.add_option("--v0", p.v0, "initial variance v0 (variance, 1/year)")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_bounds(CLI::App& app, BoundsOptions& o) {
  add_pair(app, "--kappa-bounds", o.kappa, "search box for kappa (1/year); default 0.1,10");
  add_pair(app, "--theta-bounds", o.theta, "search box for theta (variance); default 0.001,1");
  add_pair(app, "--sigma-bounds", o.sigma, "search box for sigma (1/sqrt(year)); default 0.01,2");
  add_pair(app, "--rho-bounds", o.rho, "search box for rho (dimensionless); default -0.99,0.99");
  add_pair(app, "--v0-bounds", o.v0, "search box for v0 (variance); default 0.001,1");
}

void add_de(CLI::App& app, DeOptions& o) {
  app.add_option("--pop-size", o.de.pop_size, "DE population size (count, >= 8)")->capture_default_str();
  app.add_option("--max-gens", o.de.max_gens, "DE generation cap (count)")->capture_default_str();
  app.add_option("--f-weight", o.de.f_weight, "DE differential weight F (dimensionless, (0, 2])")->capture_default_str();
  app.add_option("--crossover", o.de.crossover, "DE crossover rate Cr (probability, [0, 1])")->capture_default_str();
  app.add_option("--de-tol", o.de.tol, "DE stop when the population objective spread falls below this (currency)")
      ->capture_default_str();
  app.add_option("--de-strategy", o.strategy, "DE strategy: rand1bin | best1bin")->capture_default_str();
  app.add_option_function<std::uint64_t>(
      "--de-seed",
      [&o](const std::uint64_t& s) {
        o.de.seed = s;
        o.seed_set = true;
      },
      "DE seed (integer); defaults to --seed");
}

void add_quad(CLI::App& app, QuadOptions& o) {
  app.add_option("--nodes", o.quad.nodes, "Gauss-Legendre nodes (count, >= 64)")->capture_default_str();
  app.add_option("--upper-limit", o.quad.upper_limit, "Fourier integral truncation (frequency, > 0)")->capture_default_str();
}

void add_train(CLI::App& app, TrainOptions& o, const std::string& prefix, const nn::TrainConfig& defaults) {
  o.cfg = defaults;
  const std::string what = prefix.empty() ? "network" : prefix.substr(0, prefix.size() - 1) + " network";
  app.add_option("--" + prefix + "epochs", o.cfg.epochs, what + " training epochs (count)")->capture_default_str();
  app.add_option("--" + prefix + "lr", o.cfg.lr, what + " learning rate (step size, > 0)")->capture_default_str();
  app.add_option("--" + prefix + "batch", o.cfg.batch_size, what + " mini-batch size (rows)")
      ->default_str(defaults.batch_size == std::numeric_limits<std::size_t>::max() ? "full" : std::to_string(defaults.batch_size));
  app.add_flag("--" + prefix + "full-batch", o.full_batch, what + ": one step per epoch over all rows");
  app.add_option("--" + prefix + "optimizer", o.optimizer, what + " optimizer: adam | sgd")->capture_default_str();
  app.add_option_function<std::uint64_t>(
      "--" + prefix + "seed",
      [&o](const std::uint64_t& s) {
        o.cfg.seed = s;
        o.seed_set = true;
      },
      what + " seed (integer); derived from --seed when unset");
}

void add_chain(CLI::App& app, ChainOptions& o, bool required) {
  auto* opt = app.add_option("--chain", o.csv, "option chain CSV: strike,maturity_days,last_price")
                  ->check(CLI::ExistingFile);
  if (required) opt->required();
  app.add_option("--meta", o.meta, "market-state JSON {spot, rate, as_of}; default <chain stem>.meta.json")
      ->check(CLI::ExistingFile);
}

OptionChain load(const ChainOptions& o) { return load_chain(o.csv, o.meta); }

}  // namespace hdc::cli
