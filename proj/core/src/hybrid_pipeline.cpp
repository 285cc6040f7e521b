#include "heston_deepcal/hybrid_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/io.hpp"

namespace hdc {

namespace {

using nlohmann::ordered_json;

constexpr std::size_t kMinPoints = 5;

nn::ScaledNetwork identity_scaled(nn::Network net) {
  nn::ScaledNetwork out;
  out.net = std::move(net);
  out.input_scalers.assign(1, nn::Scaler{});
  return out;
}

// Fits 1-D scalers on (x, y) and trains the wrapped net on the scaled pairs.
std::vector<double> fit_scaled(nn::ScaledNetwork& model, std::span<const double> x, std::span<const double> y,
                               const nn::TrainConfig& cfg) {
  model.input_scalers.assign(1, nn::Scaler::fit(x));
  model.output_scaler = nn::Scaler::fit(y);
  nn::Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(x.size()), 1);
  data.targets.resize(static_cast<Eigen::Index>(y.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    data.inputs(static_cast<Eigen::Index>(i), 0) = model.input_scalers[0].transform(x[i]);
    data.targets(static_cast<Eigen::Index>(i), 0) = model.output_scaler.transform(y[i]);
  }
  auto trained = nn::train(std::move(model.net), data, cfg);
  model.net = std::move(trained.net);
  return std::move(trained.loss_history);
}

// Point by point, so a value never depends on what else is in the batch.
std::vector<double> predict_1d(const nn::ScaledNetwork& model, std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = model.predict_one(x.subspan(i, 1));
  return out;
}

double mean_sq(std::span<const double> a, std::span<const double> b) {
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return ss / static_cast<double>(a.size());
}

template <class F>
auto in_stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("[") + name + "] " + e.detail());
  }
}

ordered_json train_config_json(const nn::TrainConfig& c) {
  ordered_json j;
  j["optimizer"] = to_string(c.optimizer);
  j["lr"] = c.lr;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  if (c.batch_size == std::numeric_limits<std::size_t>::max())
    j["batch_size"] = "full";
  else
    j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

PanModel build_pan(std::uint64_t seed) {
  PanModel pan;
  pan.model = identity_scaled(nn::make_network(
      {1, 8, 8, 1}, {nn::Activation::Identity, nn::Activation::Tanh, nn::Activation::Relu}, seed));
  return pan;
}

CcnModel build_ccn(std::uint64_t seed) {
  CcnModel ccn;
  ccn.model = identity_scaled(nn::make_network(
      {1, 7, 7, 1}, {nn::Activation::Identity, nn::Activation::Sigmoid, nn::Activation::Tanh}, seed));
  return ccn;
}

nn::TrainConfig default_network_train_config() {
  nn::TrainConfig cfg;
  cfg.optimizer = nn::OptimizerKind::Adam;
  cfg.lr = 1e-2;
  cfg.batch_size = std::numeric_limits<std::size_t>::max();
  cfg.epochs = 5000;
  return cfg;
}

PanModel train_pan(const OptionChain& train_chain, const nn::TrainConfig& cfg) {
  cfg.validate();
  if (train_chain.maturities_days().size() != 1)
    fail(ErrorCode::InvalidConfig, "PAN trains on a single maturity slice");
  if (train_chain.size() < kMinPoints)
    fail(ErrorCode::TooFewQuotes, "PAN needs at least 5 train quotes, got " + std::to_string(train_chain.size()));
  PanModel pan = build_pan(cfg.seed);
  const auto strikes = train_chain.strikes();
  const auto prices = train_chain.last_prices();
  pan.loss_history = fit_scaled(pan.model, strikes, prices, cfg);
  return pan;
}

std::vector<double> pan_curve(const PanModel& pan, std::span<const double> strikes) {
  return predict_1d(pan.model, strikes);
}

CcnModel train_ccn(std::span<const double> model_prices, std::span<const double> reference,
                   const nn::TrainConfig& cfg) {
  cfg.validate();
  if (model_prices.size() != reference.size())
    fail(ErrorCode::LengthMismatch, "CCN inputs and references differ in length");
  if (model_prices.size() < kMinPoints)
    fail(ErrorCode::TooFewQuotes, "CCN needs at least 5 points, got " + std::to_string(model_prices.size()));
  CcnModel ccn = build_ccn(cfg.seed);
  ccn.loss_history = fit_scaled(ccn.model, model_prices, reference, cfg);
  return ccn;
}

std::vector<double> apply_ccn(const CcnModel& ccn, std::span<const double> model_prices) {
  return predict_1d(ccn.model, model_prices);
}

MetricsReport compute_metrics(std::span<const double> model_prices, std::span<const double> market_prices) {
  if (model_prices.size() != market_prices.size())
    fail(ErrorCode::LengthMismatch, "model and market price lists differ in length");
  if (model_prices.empty()) fail(ErrorCode::EmptyInput, "metrics need at least one price");
  MetricsReport r;
  r.n = model_prices.size();
  double ss = 0.0, sa = 0.0, sr = 0.0;
  std::size_t n_rel = 0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const double e = std::abs(model_prices[i] - market_prices[i]);
    ss += e * e;
    sa += e;
    if (market_prices[i] > 1e-12) {
      sr += e / market_prices[i];
      ++n_rel;
    } else {
      ++r.excluded_zero_price;
    }
  }
  const double n = static_cast<double>(r.n);
  r.rmse = std::sqrt(ss / n);
  r.mae = sa / n;
  r.mre = n_rel > 0 ? sr / static_cast<double>(n_rel) : 0.0;
  return r;
}

CcnTarget parse_ccn_target(const std::string& name) {
  if (name == "pan") return CcnTarget::Pan;
  if (name == "market") return CcnTarget::Market;
  fail(ErrorCode::InvalidConfig, "unknown CCN target '" + name + "' (pan|market)");
}

std::string to_string(CcnTarget target) { return target == CcnTarget::Pan ? "pan" : "market"; }

void PipelineConfig::apply_seed(std::uint64_t seed) {
  split_seed = seed;
  if (auto* de = std::get_if<DeConfig>(&method)) de->seed = seed + 1;
  pan.seed = seed + 2;
  ccn.seed = seed + 3;
}

void PipelineConfig::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail(ErrorCode::InvalidConfig, "test_fraction must lie in (0, 1)");
  validate_param_bounds(bounds);
  quad.validate();
  pan.validate();
  ccn.validate();
  if (maturity_days && !(*maturity_days > 0.0)) fail(ErrorCode::InvalidConfig, "maturity_days must be positive");
}

PipelineReport run_pipeline(const OptionChain& chain, const PipelineConfig& cfg) {
  in_stage("config", [&] {
    cfg.validate();
    return 0;
  });
  const OptionChain slice = in_stage("slice", [&] {
    const auto days = chain.maturities_days();
    if (cfg.maturity_days) return chain.slice(*cfg.maturity_days);
    if (days.size() != 1)
      fail(ErrorCode::InvalidConfig, "chain holds " + std::to_string(days.size()) +
                                         " maturities; choose one with maturity_days");
    return chain;
  });
  const ChainSplit split =
      in_stage("split", [&] { return split_train_test(slice, cfg.test_fraction, cfg.split, cfg.split_seed); });

  PipelineReport report;
  report.maturity_days = slice[0].maturity_days;
  report.split_spec = split.split_spec;
  report.calibration =
      in_stage("calibrate", [&] { return calibrate(split.train, cfg.bounds, cfg.weights, cfg.method, cfg.quad); });
  const std::vector<double> heston =
      in_stage("price", [&] { return model_prices(slice, report.calibration.params, cfg.quad); });
  report.pan = in_stage("pan", [&] { return train_pan(split.train, cfg.pan); });

  std::vector<bool> is_test(slice.size(), false);
  for (std::size_t i : split.test_positions) is_test[i] = true;
  std::vector<double> heston_train, market_train, strikes_train;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    if (is_test[i]) continue;
    heston_train.push_back(heston[i]);
    market_train.push_back(slice[i].last_price);
    strikes_train.push_back(slice[i].strike);
  }
  const std::vector<double> targets =
      cfg.ccn_target == CcnTarget::Pan ? pan_curve(report.pan, strikes_train) : market_train;
  report.ccn = in_stage("ccn", [&] { return train_ccn(heston_train, targets, cfg.ccn); });

  std::vector<double> corrected = apply_ccn(report.ccn, heston);
  report.correction_applied = true;
  if (cfg.gate_correction) {
    std::vector<double> corrected_train;
    for (std::size_t i = 0; i < slice.size(); ++i)
      if (!is_test[i]) corrected_train.push_back(corrected[i]);
    const bool fits_targets = mean_sq(corrected_train, targets) <= mean_sq(heston_train, targets);
    const bool fits_market = mean_sq(corrected_train, market_train) < mean_sq(heston_train, market_train);
    if (!(fits_targets && fits_market)) {
      corrected = heston;
      report.correction_applied = false;
    }
  }

  const std::vector<double> pan_all = pan_curve(report.pan, slice.strikes());
  std::vector<double> h[2], c[2], m[2];
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const int part = is_test[i] ? 1 : 0;
    h[part].push_back(heston[i]);
    c[part].push_back(corrected[i]);
    m[part].push_back(slice[i].last_price);
    report.curve.push_back({slice[i].strike, is_test[i], slice[i].last_price, heston[i], pan_all[i], corrected[i]});
  }
  report.traditional_train = compute_metrics(h[0], m[0]);
  report.traditional_test = compute_metrics(h[1], m[1]);
  report.deep_learning_train = compute_metrics(c[0], m[0]);
  report.deep_learning_test = compute_metrics(c[1], m[1]);
  return report;
}

std::string metrics_to_json(const MetricsReport& metrics) {
  ordered_json j;
  j["rmse"] = metrics.rmse;
  j["mae"] = metrics.mae;
  j["mre"] = metrics.mre;
  j["n"] = metrics.n;
  j["excluded_zero_price"] = metrics.excluded_zero_price;
  return j.dump(2) + "\n";
}

std::string report_to_json(const PipelineReport& report, const PipelineConfig& cfg) {
  const auto six = [](const MetricsReport& train, const MetricsReport& test) {
    ordered_json j;
    j["train"] = {{"rmse", train.rmse}, {"mae", train.mae}, {"mre", train.mre}};
    j["test"] = {{"rmse", test.rmse}, {"mae", test.mae}, {"mre", test.mre}};
    return j;
  };
  ordered_json j;
  j["format"] = "heston_deepcal.pipeline_report";
  j["version"] = 1;
  j["traditional"] = six(report.traditional_train, report.traditional_test);
  j["deep_learning"] = six(report.deep_learning_train, report.deep_learning_test);
  j["counts"] = {
      {"train", {{"n", report.traditional_train.n}, {"excluded_zero_price", report.traditional_train.excluded_zero_price}}},
      {"test", {{"n", report.traditional_test.n}, {"excluded_zero_price", report.traditional_test.excluded_zero_price}}}};

  const auto& cal = report.calibration;
  ordered_json params;
  const auto p = cal.params.to_array();
  for (std::size_t i = 0; i < p.size(); ++i) params[kParamNames[i]] = p[i];
  j["calibration"] = {{"method", cal.method},
                      {"params", params},
                      {"objective", cal.objective},
                      {"evaluations", cal.evaluations},
                      {"iterations", cal.iterations},
                      {"converged", cal.converged},
                      {"feller_satisfied", cal.params.feller_satisfied()}};
  j["correction_applied"] = report.correction_applied;

  ordered_json run;
  run["maturity_days"] = report.maturity_days;
  run["split"] = report.split_spec;
  run["test_fraction"] = cfg.test_fraction;
  run["split_strategy"] = to_string(cfg.split);
  run["split_seed"] = cfg.split_seed;
  run["weights"] = to_string(cfg.weights.mode);
  ordered_json bounds;
  for (std::size_t i = 0; i < 5; ++i) bounds[kParamNames[i]] = {cfg.bounds.lower[i], cfg.bounds.upper[i]};
  run["bounds"] = bounds;
  if (const auto* de = std::get_if<DeConfig>(&cfg.method)) {
    run["optimizer"] = {{"method", "de"},
                        {"pop_size", de->pop_size},
                        {"f_weight", de->f_weight},
                        {"crossover", de->crossover},
                        {"strategy", to_string(de->strategy)},
                        {"max_gens", de->max_gens},
                        {"tol", de->tol},
                        {"seed", de->seed}};
  } else {
    const auto& nm = std::get<NelderMeadSettings>(cfg.method).config;
    run["optimizer"] = {{"method", "nelder-mead"}, {"max_iters", nm.max_iters}, {"x_tol", nm.x_tol}, {"f_tol", nm.f_tol}};
  }
  run["quadrature"] = {{"upper_limit", cfg.quad.upper_limit}, {"nodes", cfg.quad.nodes}, {"lower_offset", cfg.quad.lower_offset}};
  run["pan"] = train_config_json(cfg.pan);
  run["ccn"] = train_config_json(cfg.ccn);
  run["ccn_target"] = to_string(cfg.ccn_target);
  run["gate_correction"] = cfg.gate_correction;
  run["pan_final_loss"] = report.pan.loss_history.empty() ? 0.0 : report.pan.loss_history.back();
  run["ccn_final_loss"] = report.ccn.loss_history.empty() ? 0.0 : report.ccn.loss_history.back();
  j["run"] = run;
  return j.dump(2) + "\n";
}

std::string curves_to_csv(const PipelineReport& report) {
  std::string out = "strike,series,value\n";
  const std::pair<const char*, double CurvePoint::*> series[] = {
      {"market", &CurvePoint::market}, {"heston", &CurvePoint::heston}, {"pan", &CurvePoint::pan},
      {"corrected", &CurvePoint::corrected}};
  for (const auto& [name, field] : series)
    for (const auto& pt : report.curve) {
      out += io::format_double(pt.strike);
      out += ',';
      out += name;
      out += ',';
      out += io::format_double(pt.*field);
      out += '\n';
    }
  return out;
}

nn::NetworkDocument pan_document(const PanModel& pan) {
  nn::NetworkDocument doc{pan.model, {}};
  doc.metadata["final_loss"] = pan.loss_history.empty() ? 0.0 : pan.loss_history.back();
  doc.metadata["epochs"] = static_cast<double>(pan.loss_history.size());
  return doc;
}

nn::NetworkDocument ccn_document(const CcnModel& ccn) {
  nn::NetworkDocument doc{ccn.model, {}};
  doc.metadata["final_loss"] = ccn.loss_history.empty() ? 0.0 : ccn.loss_history.back();
  doc.metadata["epochs"] = static_cast<double>(ccn.loss_history.size());
  return doc;
}

}  // namespace hdc
