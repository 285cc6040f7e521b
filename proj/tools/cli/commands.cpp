#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include <heston_deepcal/error.hpp>
#include <heston_deepcal/io.hpp>
#include <heston_deepcal/network_io.hpp>
#include <heston_deepcal/synthetic.hpp>

namespace hdc::cli {

namespace {

using nlohmann::ordered_json;

ordered_json params_json(const HestonParams& p) {
  ordered_json j;
  const auto a = p.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) j[kParamNames[i]] = a[i];
  return j;
}

ordered_json calibration_json(const CalibrationResult& r) {
  ordered_json j;
  j["method"] = r.method;
  j["params"] = params_json(r.params);
  j["objective"] = r.objective;
  j["evaluations"] = r.evaluations;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["feller_satisfied"] = r.params.feller_satisfied();
  return j;
}

CalibrationWeights make_weights(const std::string& mode) {
  CalibrationWeights w;
  w.mode = parse_weight_mode(mode);
  if (w.mode == WeightMode::Custom) fail(ErrorCode::InvalidConfig, "custom weights are library-only; use uniform or inverse-price");
  return w;
}

MarketState market(double spot, double rate) {
  MarketState s{spot, rate, "1970-01-01"};
  s.validate();
  return s;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    io::write_atomic(path, content);
  }
}

void note(const GlobalOptions& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void require_pair(const std::vector<double>& v, const char* flag) {
  if (v.size() != 2) fail(ErrorCode::InvalidConfig, std::string(flag) + " expects LO,HI");
}

}  // namespace

void PriceCommand::attach(CLI::App& app) {
  add_params(app, params);
  add_quad(app, quad);
  app.add_option("--spot", spot, "spot price S (currency)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--rate", rate, "continuously compounded rate r (1/year)")->capture_default_str();
  app.add_option("--strike", strikes, "strike K (currency); repeat or comma-separate for several")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--maturity", maturity, "time to expiry tau (years)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--bs-vol", bs_vol, "also print the Black-Scholes price at this volatility (1/sqrt(year))")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", format, "stdout format: text | json")->capture_default_str()->check(CLI::IsMember({"text", "json"}));
}

int PriceCommand::run(const GlobalOptions&) const {
  const MarketState state = market(spot, rate);
  params.params.validate();
  quad.quad.validate();
  const SlicePricer slice(state, params.params, maturity, quad.quad);
  ordered_json out;
  out["spot"] = spot;
  out["rate"] = rate;
  out["maturity"] = maturity;
  out["params"] = params_json(params.params);
  out["quotes"] = ordered_json::array();
  std::string text = "strike,price,p1,p2" + std::string(bs_vol ? ",bs_price" : "") + "\n";
  for (double k : strikes) {
    const auto d = slice.price(k);
    ordered_json q{{"strike", k}, {"price", d.price}, {"p1", d.p1}, {"p2", d.p2}};
    text += io::format_double(k) + "," + io::format_double(d.price) + "," + io::format_double(d.p1) + "," +
            io::format_double(d.p2);
    if (bs_vol) {
      const double bs = bs_call(k, state, *bs_vol, maturity);
      q["bs_price"] = bs;
      text += "," + io::format_double(bs);
    }
    text += "\n";
    out["quotes"].push_back(q);
  }
  std::cout << (format == "json" ? out.dump(2) + "\n" : text);
  return 0;
}

void McCheckCommand::attach(CLI::App& app) {
  add_params(app, params);
  add_quad(app, quad);
  app.add_option("--spot", spot, "spot price S (currency)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--rate", rate, "continuously compounded rate r (1/year)")->capture_default_str();
  app.add_option("--strike", strikes, "strikes K (currency), comma-separated")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--maturity", maturity, "time to expiry tau (years)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--paths", paths, "Monte Carlo paths (count, >= 1000)")->capture_default_str()->check(CLI::Range(std::size_t{1000}, std::numeric_limits<std::size_t>::max()));
  app.add_option("--steps", steps, "time steps per path (count, >= 10)")->capture_default_str()->check(CLI::Range(std::size_t{10}, std::numeric_limits<std::size_t>::max()));
  app.add_option("--n-se", n_se, "pass band in Monte Carlo standard errors (count)")->capture_default_str()->check(CLI::PositiveNumber);
}

int McCheckCommand::run(const GlobalOptions& g) const {
  const MarketState state = market(spot, rate);
  params.params.validate();
  McConfig mc;
  mc.n_paths = paths;
  mc.n_steps = steps;
  mc.seed = g.seed;
  mc.threads = g.threads;
  mc.validate();
  const SlicePricer slice(state, params.params, maturity, quad.quad);
  const auto est = mc_call_prices(strikes, state, params.params, maturity, mc);
  std::ostringstream table;
  table << "strike,analytic,mc,std_error,z,status\n";
  bool all_pass = true;
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    const double a = slice.price(strikes[i]).price;
    const double z = est[i].std_error > 0.0 ? (a - est[i].value) / est[i].std_error : 0.0;
    const bool pass = std::abs(a - est[i].value) <= n_se * est[i].std_error;
    all_pass = all_pass && pass;
    table << io::format_double(strikes[i]) << ',' << fixed(a, 6) << ',' << fixed(est[i].value, 6) << ','
          << fixed(est[i].std_error, 6) << ',' << fixed(z, 3) << ',' << (pass ? "PASS" : "FAIL") << '\n';
  }
  std::cout << table.str();
  note(g, all_pass ? "all strikes within " + fixed(n_se, 1) + " standard errors"
                   : "some strikes outside " + fixed(n_se, 1) + " standard errors");
  return all_pass ? 0 : 3;
}

void CalibrateCommand::attach(CLI::App& app) {
  add_chain(app, chain);
  add_bounds(app, bounds);
  add_de(app, de);
  add_quad(app, quad);
  app.add_option("--method", method, "optimizer: de | nelder-mead")->capture_default_str();
  app.add_option("--weights", weights, "quote weights: uniform | inverse-price")->capture_default_str();
  app.add_option("--nm-iters", nm_iters, "Nelder-Mead iteration cap (count)")->capture_default_str();
  app.add_option("--out", out, "result JSON path (stdout when omitted)");
  app.add_option("--curve", curve, "fitted-curve CSV path: strike,maturity_days,series,value");
}

int CalibrateCommand::run(const GlobalOptions& g) const {
  const CalibrationMethod m = parse_calibration_method(method);
  const ParamBounds b = bounds.resolve();
  const CalibrationWeights w = make_weights(weights);
  quad.quad.validate();
  MethodConfig cfg;
  if (m == CalibrationMethod::DifferentialEvolution) {
    DeConfig d = de.resolve(g.seed);
    d.threads = g.threads;
    cfg = d;
  } else {
    NelderMeadSettings nm;
    nm.config.max_iters = nm_iters;
    cfg = nm;
  }
  const OptionChain c = load(chain);
  const CalibrationResult r = calibrate(c, b, w, cfg, quad.quad);
  note(g, "calibration took " + fixed(r.wall_seconds, 2) + " s over " + std::to_string(r.evaluations) + " evaluations");
  ordered_json j = calibration_json(r);
  j["n_quotes"] = c.size();
  emit(out, j.dump(2) + "\n");
  if (!curve.empty()) {
    const auto model = model_prices(c, r.params, quad.quad);
    std::string csv = "strike,maturity_days,series,value\n";
    for (const char* series : {"market", "heston"})
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double v = std::string(series) == "market" ? c[i].last_price : model[i];
        csv += io::format_double(c[i].strike) + "," + io::format_double(c[i].maturity_days) + "," + series + "," +
               io::format_double(v) + "\n";
      }
    io::write_atomic(curve, csv);
  }
  return 0;
}

void SurrogateGenCommand::attach(CLI::App& app) {
  add_bounds(app, bounds);
  add_quad(app, quad);
  app.add_option("--scheme", scheme, "sampling scheme: uniform | grid")->capture_default_str();
  app.add_option("--samples", samples, "rows for the uniform scheme (count, >= 100)")->capture_default_str();
  app.add_option("--grid-points", grid_points, "points per axis for the grid scheme (count); rows = points^7")
      ->capture_default_str();
  app.add_option("--maturity-range", maturity_range, "maturity range (years)")
      ->expected(2)->delimiter(',')->type_name("LO,HI")->capture_default_str();
  app.add_option("--moneyness-range", moneyness_range, "log-moneyness ln(S/K) range (dimensionless)")
      ->expected(2)->delimiter(',')->type_name("LO,HI")->capture_default_str();
  app.add_option("--rate", rate, "fixed rate for the whole dataset (1/year)")->capture_default_str();
  app.add_option("--out", out, "dataset CSV path")->required();
}

int SurrogateGenCommand::run(const GlobalOptions& g) const {
  require_pair(maturity_range, "--maturity-range");
  require_pair(moneyness_range, "--moneyness-range");
  SamplingSpec spec;
  spec.bounds = bounds.resolve();
  spec.maturity_range = {maturity_range[0], maturity_range[1]};
  spec.moneyness_range = {moneyness_range[0], moneyness_range[1]};
  spec.rate = rate;
  spec.n_samples = samples;
  spec.scheme = parse_sampling_scheme(scheme);
  spec.grid_points = grid_points;
  spec.seed = g.seed;
  spec.threads = g.threads;
  const SyntheticDataset ds = gen_synthetic(spec, quad.quad);
  io::write_atomic(out, samples_to_csv(ds.samples));
  ordered_json j{{"rows", ds.samples.size()}, {"attempted", ds.attempted}, {"failures", ds.failures},
                 {"scheme", to_string(spec.scheme)}, {"rate", rate}, {"seed", g.seed}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

void SurrogateTrainCommand::attach(CLI::App& app) {
  add_train(app, train, "", default_surrogate_train_config());
  app.add_option("--data", data, "dataset CSV from `surrogate gen`")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "network JSON path")->required();
  app.add_option("--hidden", hidden, "hidden layer widths (count each), comma-separated")
      ->delimiter(',')->capture_default_str();
  app.add_option("--activation", activation, "hidden activation: relu | tanh | sigmoid | identity")
      ->capture_default_str();
  app.add_option("--validation-fraction", validation_fraction, "held-out share of rows (fraction, [0, 1))")
      ->capture_default_str();
  app.add_option("--rate", rate, "rate the dataset was generated with (1/year)")->capture_default_str();
}

int SurrogateTrainCommand::run(const GlobalOptions& g) const {
  SurrogateArch arch;
  arch.hidden = hidden;
  arch.activation = nn::parse_activation(activation);
  const nn::TrainConfig cfg = train.resolve(g.seed);
  const auto samples = parse_samples_csv(io::read_text(data));
  const SurrogateModel model = train_surrogate(samples, arch, cfg, rate, validation_fraction);
  nn::save_network(model.to_document(), out);
  ordered_json j{{"rows", samples.size()},
                 {"train_rmse", model.train_rmse},
                 {"validation_rmse", model.validation_rmse},
                 {"epochs", cfg.epochs},
                 {"parameters", model.model.net.parameter_count()}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

void SurrogateCalibrateCommand::attach(CLI::App& app) {
  add_chain(app, chain);
  add_bounds(app, bounds);
  add_de(app, de);
  app.add_option("--network", network, "surrogate network JSON from `surrogate train`")
      ->required()->check(CLI::ExistingFile);
  app.add_option("--weights", weights, "quote weights: uniform | inverse-price")->capture_default_str();
  app.add_option("--out", out, "result JSON path (stdout when omitted)");
}

int SurrogateCalibrateCommand::run(const GlobalOptions& g) const {
  const ParamBounds b = bounds.resolve();
  const CalibrationWeights w = make_weights(weights);
  DeConfig d = de.resolve(g.seed);
  d.threads = g.threads;
  const SurrogateModel model = SurrogateModel::from_document(nn::load_network(network));
  const OptionChain c = load(chain);
  const SurrogateCalibration r = surrogate_calibrate(c, model, b, w, d);
  for (const auto& warn : r.warnings)
    note(g, "warning: quote " + std::to_string(warn.quote_index) + ": " + warn.reason);
  ordered_json j = calibration_json(r.result);
  j["n_quotes"] = c.size();
  ordered_json warnings = ordered_json::array();
  for (const auto& warn : r.warnings) warnings.push_back({{"quote", warn.quote_index}, {"reason", warn.reason}});
  j["extrapolation_warnings"] = warnings;
  j["timing"] = {{"wall_seconds", r.result.wall_seconds}, {"evaluations_per_second", r.evaluations_per_second}};
  emit(out, j.dump(2) + "\n");
  return 0;
}

void PanTrainCommand::attach(CLI::App& app) {
  add_chain(app, chain);
  add_train(app, train, "", default_network_train_config());
  app.add_option("--maturity-days", maturity_days, "maturity slice to fit (calendar days); required for multi-maturity chains");
  app.add_option("--out", out, "PAN network JSON path");
  app.add_option("--curve", curve, "smoothed-curve CSV path: strike,series,value");
  app.add_option("--curve-points", curve_points, "strikes in the dense PAN sweep (count)")->capture_default_str();
}

int PanTrainCommand::run(const GlobalOptions& g) const {
  const nn::TrainConfig cfg = train.resolve(g.seed);
  const OptionChain full = load(chain);
  const auto days = full.maturities_days();
  if (!maturity_days && days.size() != 1)
    fail(ErrorCode::InvalidConfig, "chain holds several maturities; pass --maturity-days");
  const OptionChain slice = maturity_days ? full.slice(*maturity_days) : full;
  const PanModel pan = train_pan(slice, cfg);
  const auto strikes = slice.strikes();
  const auto fitted = pan_curve(pan, strikes);
  const MetricsReport m = compute_metrics(fitted, slice.last_prices());
  if (!out.empty()) nn::save_network(pan_document(pan), out);
  if (!curve.empty()) {
    std::string csv = "strike,series,value\n";
    for (std::size_t i = 0; i < slice.size(); ++i)
      csv += io::format_double(strikes[i]) + ",market," + io::format_double(slice[i].last_price) + "\n";
    const auto dense = linspace(strikes.front(), strikes.back(), std::max<std::size_t>(curve_points, 2));
    const auto smooth = pan_curve(pan, dense);
    for (std::size_t i = 0; i < dense.size(); ++i)
      csv += io::format_double(dense[i]) + ",pan," + io::format_double(smooth[i]) + "\n";
    io::write_atomic(curve, csv);
  }
  ordered_json j{{"n", slice.size()},
                 {"maturity_days", slice[0].maturity_days},
                 {"train_rmse", m.rmse},
                 {"train_mae", m.mae},
                 {"final_loss", pan.loss_history.back()},
                 {"epochs", cfg.epochs},
                 {"seed", cfg.seed}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

void PipelineCommand::attach(CLI::App& app) {
  add_chain(app, chain);
  add_bounds(app, bounds);
  add_de(app, de);
  add_quad(app, quad);
  add_train(app, pan, "pan-", default_network_train_config());
  add_train(app, ccn, "ccn-", default_network_train_config());
  app.add_option("--maturity-days", maturity_days, "maturity slice (calendar days); required for multi-maturity chains");
  app.add_option("--test-fraction", test_fraction, "share of quotes held out (fraction, (0, 1))")->capture_default_str();
  app.add_option("--split", split, "split strategy: interleaved | random")->capture_default_str();
  app.add_option("--method", method, "calibration optimizer: de | nelder-mead")->capture_default_str();
  app.add_option("--weights", weights, "quote weights: uniform | inverse-price")->capture_default_str();
  app.add_option("--ccn-target", ccn_target, "CCN regression target: pan | market")->capture_default_str();
  app.add_flag("--no-gate", no_gate, "always apply the CCN, even when it does not reduce the train error");
  app.add_option("--report", report, "report JSON path (stdout when omitted)");
  app.add_option("--curves", curves, "curve CSV path: strike,series,value");
}

int PipelineCommand::run(const GlobalOptions& g) const {
  PipelineConfig cfg;
  cfg.test_fraction = test_fraction;
  cfg.split = parse_split_strategy(split);
  cfg.bounds = bounds.resolve();
  cfg.weights = make_weights(weights);
  cfg.quad = quad.quad;
  cfg.ccn_target = parse_ccn_target(ccn_target);
  cfg.gate_correction = !no_gate;
  cfg.maturity_days = maturity_days;
  if (parse_calibration_method(method) == CalibrationMethod::DifferentialEvolution) {
    DeConfig d = de.resolve(g.seed);
    d.threads = g.threads;
    cfg.method = d;
  } else {
    cfg.method = NelderMeadSettings{};
  }
  cfg.pan = pan.resolve(g.seed);
  cfg.ccn = ccn.resolve(g.seed);
  cfg.apply_seed(g.seed);
  if (auto* d = std::get_if<DeConfig>(&cfg.method); d && de.seed_set) d->seed = de.de.seed;
  if (pan.seed_set) cfg.pan.seed = pan.cfg.seed;
  if (ccn.seed_set) cfg.ccn.seed = ccn.cfg.seed;
  cfg.validate();

  const PipelineReport r = run_pipeline(load(chain), cfg);
  emit(report, report_to_json(r, cfg));
  if (!curves.empty()) io::write_atomic(curves, curves_to_csv(r));
  note(g, "traditional test RMSE " + io::format_double(r.traditional_test.rmse) + ", deep-learning test RMSE " +
              io::format_double(r.deep_learning_test.rmse) +
              (r.correction_applied ? "" : " (correction rejected; identity used)"));
  return 0;
}

void MetricsCommand::attach(CLI::App& app) {
  app.add_option("--file", file, "CSV with model and market price columns (currency)")
      ->required()->check(CLI::ExistingFile);
  app.add_option("--model-column", model_column, "column holding model prices")->capture_default_str();
  app.add_option("--market-column", market_column, "column holding market prices")->capture_default_str();
}

int MetricsCommand::run(const GlobalOptions&) const {
  std::istringstream in(io::read_text(file));
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::EmptyInput, "metrics CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = io::split_csv_line(line);
  const auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorCode::MissingColumn, "metrics CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t mc = find(model_column), kc = find(market_column);
  std::vector<double> model, mkt;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto cells = io::split_csv_line(line);
    double a = 0.0, b = 0.0;
    if (mc >= cells.size() || kc >= cells.size() || !io::parse_double(cells[mc], a) || !io::parse_double(cells[kc], b))
      fail(ErrorCode::ParseError, "metrics CSV row " + std::to_string(row) + ": bad number");
    model.push_back(a);
    mkt.push_back(b);
  }
  std::cout << metrics_to_json(compute_metrics(model, mkt));
  return 0;
}

void SynthChainCommand::attach(CLI::App& app) {
  add_params(app, params);
  add_quad(app, quad);
  app.add_option("--spot", spot, "spot price S (currency)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--rate", rate, "continuously compounded rate r (1/year)")->capture_default_str();
  app.add_option("--as-of", as_of, "valuation date (YYYY-MM-DD)")->capture_default_str();
  app.add_option("--days", days, "maturities (calendar days), comma-separated")->delimiter(',')->capture_default_str();
  app.add_option("--strikes", strike_grid, "strike grid LO,HI,COUNT (currency, currency, count)")
      ->expected(3)->delimiter(',')->type_name("LO,HI,COUNT")->capture_default_str();
  app.add_option("--smile", smile, "smile bump amplitude as a fraction of spot at the slice wings (fraction)")
      ->capture_default_str();
  app.add_option("--noise", noise, "price noise standard deviation (currency)")->capture_default_str();
  app.add_option("--out", out, "chain CSV path; the meta JSON is written next to it")->required();
}

int SynthChainCommand::run(const GlobalOptions& g) const {
  if (strike_grid.size() != 3 || !(strike_grid[2] >= 1.0) || std::floor(strike_grid[2]) != strike_grid[2])
    fail(ErrorCode::InvalidConfig, "--strikes expects LO,HI,COUNT with an integer COUNT >= 1");
  const MarketState state{spot, rate, as_of};
  const auto strikes = linspace(strike_grid[0], strike_grid[1], static_cast<std::size_t>(strike_grid[2]));
  OptionChain c = synthetic_chain(state, params.params, days, strikes, quad.quad);
  if (smile != 0.0) c = perturb_with_smile(c, smile);
  if (noise > 0.0) c = perturb_with_noise(c, noise, g.seed);
  save_chain(c, out);
  ordered_json j{{"quotes", c.size()}, {"maturities", c.maturities_days()}, {"smile", smile}, {"noise", noise}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace hdc::cli
