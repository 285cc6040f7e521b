#include "heston_deepcal/surrogate.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/io.hpp"
#include "heston_deepcal/parallel.hpp"
#include "heston_deepcal/random.hpp"

namespace hdc {

namespace {

constexpr std::uint64_t kSplitStream = 0x5A11D;
constexpr std::size_t kMaxGridRows = 50'000'000;

std::size_t checked_pow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && out > kMaxGridRows / base) return kMaxGridRows + 1;
    out *= base;
  }
  return out;
}

// Lower and upper edge of each of the 7 feature axes.
std::array<std::array<double, 2>, 7> axes(const SamplingSpec& spec) {
  std::array<std::array<double, 2>, 7> a{};
  for (std::size_t i = 0; i < 5; ++i) a[i] = {spec.bounds.lower[i], spec.bounds.upper[i]};
  a[5] = spec.maturity_range;
  a[6] = spec.moneyness_range;
  return a;
}

double grid_value(const std::array<double, 2>& range, std::size_t k, std::size_t g) {
  if (g == 1) return 0.5 * (range[0] + range[1]);
  return range[0] + (range[1] - range[0]) * static_cast<double>(k) / static_cast<double>(g - 1);
}

bool price_row(SurrogateSample& row, const MarketState& unit, const QuadratureConfig& quad) {
  try {
    row.price = call_price(std::exp(-row.moneyness), unit, row.eta, row.maturity, quad);
    return std::isfinite(row.price);
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::Numerical) throw;
    return false;
  }
}

bool feature_less(const SurrogateSample& a, const SurrogateSample& b) {
  const auto fa = a.features();
  const auto fb = b.features();
  if (fa != fb) return fa < fb;
  return a.price < b.price;
}

double rmse_of(const nn::ScaledNetwork& model, const std::vector<SurrogateSample>& rows) {
  if (rows.empty()) return 0.0;
  const nn::Dataset d = to_dataset(rows);
  const auto pred = model.predict(d.inputs);
  double ss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) ss += (pred[i] - rows[i].price) * (pred[i] - rows[i].price);
  return std::sqrt(ss / static_cast<double>(rows.size()));
}

}  // namespace

SamplingScheme parse_sampling_scheme(const std::string& name) {
  if (name == "uniform" || name == "uniform_random" || name == "uniform-random") return SamplingScheme::UniformRandom;
  if (name == "grid") return SamplingScheme::Grid;
  fail(ErrorCode::InvalidConfig, "unknown sampling scheme '" + name + "' (uniform|grid)");
}

std::string to_string(SamplingScheme scheme) {
  return scheme == SamplingScheme::Grid ? "grid" : "uniform";
}

void SamplingSpec::validate() const {
  validate_param_bounds(bounds);
  if (!(maturity_range[0] > 0.0) || !(maturity_range[1] > maturity_range[0]) || !std::isfinite(maturity_range[1]))
    fail(ErrorCode::InvalidConfig, "maturity range must satisfy 0 < T_min < T_max");
  if (!(moneyness_range[1] > moneyness_range[0]) || !std::isfinite(moneyness_range[0]) ||
      !std::isfinite(moneyness_range[1]))
    fail(ErrorCode::InvalidConfig, "moneyness range must satisfy m_min < m_max");
  if (!std::isfinite(rate)) fail(ErrorCode::InvalidConfig, "rate must be finite");
  if (scheme == SamplingScheme::Grid) {
    if (grid_points == 0) fail(ErrorCode::InvalidConfig, "grid needs at least 1 point per axis");
    if (row_count() > kMaxGridRows) fail(ErrorCode::InvalidConfig, "grid has too many rows");
  }
  if (row_count() < 100) fail(ErrorCode::InvalidConfig, "synthetic dataset needs at least 100 rows");
}

std::size_t SamplingSpec::row_count() const {
  return scheme == SamplingScheme::Grid ? checked_pow(grid_points, 7) : n_samples;
}

SyntheticDataset gen_synthetic(const SamplingSpec& spec, const QuadratureConfig& quad) {
  spec.validate();
  quad.validate();
  const MarketState unit{1.0, spec.rate, "1970-01-01"};
  const auto ax = axes(spec);
  const std::size_t n = spec.row_count();
  std::vector<SurrogateSample> rows(n);
  std::vector<char> ok(n, 0);

  if (spec.scheme == SamplingScheme::UniformRandom) {
    parallel_for(
        n,
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) {
            CounterRng rng(spec.seed, i);
            std::array<double, 7> f{};
            for (std::size_t k = 0; k < 7; ++k) f[k] = rng.uniform(ax[k][0], ax[k][1]);
            SurrogateSample& row = rows[i];
            row.eta = HestonParams::from_array(f.data());
            row.maturity = f[5];
            row.moneyness = f[6];
            ok[i] = price_row(row, unit, quad) ? 1 : 0;
          }
        },
        spec.threads);
  } else {
    // Moneyness varies fastest; each (eta, T) cell shares one slice pricer.
    const std::size_t g = spec.grid_points;
    const std::size_t cells = n / g;
    parallel_for(
        cells,
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t c = begin; c < end; ++c) {
            std::array<double, 6> f{};
            std::size_t rest = c;
            for (int k = 5; k >= 0; --k) {
              f[static_cast<std::size_t>(k)] = grid_value(ax[static_cast<std::size_t>(k)], rest % g, g);
              rest /= g;
            }
            const HestonParams eta = HestonParams::from_array(f.data());
            std::optional<SlicePricer> slice;
            try {
              slice.emplace(unit, eta, f[5], quad);
            } catch (const Error& e) {
              if (e.category() != ErrorCategory::Numerical) throw;
            }
            for (std::size_t j = 0; j < g; ++j) {
              SurrogateSample& row = rows[c * g + j];
              row.eta = eta;
              row.maturity = f[5];
              row.moneyness = grid_value(ax[6], j, g);
              if (!slice) continue;
              try {
                row.price = slice->price(std::exp(-row.moneyness)).price;
                ok[c * g + j] = std::isfinite(row.price) ? 1 : 0;
              } catch (const Error& e) {
                if (e.category() != ErrorCategory::Numerical) throw;
              }
            }
          }
        },
        spec.threads);
  }

  SyntheticDataset out;
  out.attempted = n;
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i])
      out.samples.push_back(rows[i]);
    else
      ++out.failures;
  }
  if (static_cast<double>(out.failures) > 0.01 * static_cast<double>(n))
    fail(ErrorCode::TooManyFailures, std::to_string(out.failures) + " of " + std::to_string(n) +
                                         " synthetic rows failed to price; narrow the bounds or refine the quadrature");
  return out;
}

nn::Dataset to_dataset(const std::vector<SurrogateSample>& samples) {
  nn::Dataset d;
  const auto m = static_cast<Eigen::Index>(samples.size());
  d.inputs.resize(m, 7);
  d.targets.resize(m, 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    const auto f = s.features();
    for (Eigen::Index c = 0; c < 7; ++c) d.inputs(r, c) = f[static_cast<std::size_t>(c)];
    d.targets(r, 0) = s.price;
  }
  return d;
}

std::string samples_to_csv(const std::vector<SurrogateSample>& samples) {
  std::string out = "kappa,theta,sigma,rho,v0,maturity,moneyness,price\n";
  for (const auto& s : samples) {
    for (double v : s.features()) {
      out += io::format_double(v);
      out += ',';
    }
    out += io::format_double(s.price);
    out += '\n';
  }
  return out;
}

std::vector<SurrogateSample> parse_samples_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::EmptyInput, "dataset CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = io::split_csv_line(line);
  const std::array<std::string, 8> expected = {"kappa", "theta", "sigma", "rho", "v0", "maturity", "moneyness", "price"};
  std::array<std::size_t, 8> col{};
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const auto it = std::find(header.begin(), header.end(), expected[k]);
    if (it == header.end()) fail(ErrorCode::MissingColumn, "dataset CSV lacks column '" + expected[k] + "'");
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<SurrogateSample> rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    const auto cells = io::split_csv_line(line);
    std::array<double, 8> v{};
    for (std::size_t k = 0; k < 8; ++k) {
      if (col[k] >= cells.size() || !io::parse_double(cells[col[k]], v[k]))
        fail(ErrorCode::ParseError, "dataset row " + std::to_string(row_no) + ": bad value in column '" + expected[k] + "'");
    }
    SurrogateSample s;
    s.eta = HestonParams::from_array(v.data());
    s.maturity = v[5];
    s.moneyness = v[6];
    s.price = v[7];
    if (s.price < 0.0) fail(ErrorCode::NegativePrice, "dataset row " + std::to_string(row_no) + ": negative price");
    rows.push_back(s);
  }
  if (rows.empty()) fail(ErrorCode::EmptyInput, "dataset CSV has no rows");
  return rows;
}

nn::TrainConfig default_surrogate_train_config() {
  nn::TrainConfig cfg;
  cfg.optimizer = nn::OptimizerKind::Adam;
  cfg.lr = 2e-3;
  cfg.batch_size = 32;
  cfg.epochs = 200;
  return cfg;
}

nn::NetworkDocument SurrogateModel::to_document() const {
  nn::NetworkDocument doc;
  doc.model = model;
  doc.metadata["surrogate"] = 1.0;
  doc.metadata["rate"] = rate;
  doc.metadata["train_rmse"] = train_rmse;
  doc.metadata["validation_rmse"] = validation_rmse;
  for (std::size_t k = 0; k < 7; ++k) {
    doc.metadata[std::string("min.") + kSurrogateFeatures[k]] = feature_min[k];
    doc.metadata[std::string("max.") + kSurrogateFeatures[k]] = feature_max[k];
  }
  return doc;
}

SurrogateModel SurrogateModel::from_document(const nn::NetworkDocument& doc) {
  if (doc.model.net.input_dim() != 7 || doc.model.net.output_dim() != 1)
    fail(ErrorCode::ShapeMismatch, "surrogate network must map 7 features to 1 price");
  const auto get = [&](const std::string& key) {
    const auto it = doc.metadata.find(key);
    if (it == doc.metadata.end()) fail(ErrorCode::ParseError, "surrogate metadata lacks '" + key + "'");
    return it->second;
  };
  SurrogateModel s;
  s.model = doc.model;
  s.rate = get("rate");
  s.train_rmse = get("train_rmse");
  s.validation_rmse = get("validation_rmse");
  for (std::size_t k = 0; k < 7; ++k) {
    s.feature_min[k] = get(std::string("min.") + kSurrogateFeatures[k]);
    s.feature_max[k] = get(std::string("max.") + kSurrogateFeatures[k]);
  }
  return s;
}

SurrogateModel train_surrogate(const std::vector<SurrogateSample>& samples, const SurrogateArch& arch,
                               const nn::TrainConfig& cfg, double rate, double validation_fraction) {
  cfg.validate();
  if (!std::isfinite(rate)) fail(ErrorCode::InvalidConfig, "rate must be finite");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    fail(ErrorCode::InvalidConfig, "validation fraction must lie in [0, 1)");
  if (samples.size() < 10) fail(ErrorCode::TooFewQuotes, "surrogate training needs at least 10 samples");
  for (std::size_t w : arch.hidden)
    if (w == 0) fail(ErrorCode::ZeroFanIn, "hidden layer width must be positive");

  std::vector<SurrogateSample> sorted = samples;
  std::sort(sorted.begin(), sorted.end(), feature_less);
  std::vector<std::size_t> order(sorted.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(cfg.seed, kSplitStream);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(sorted.size())));
  std::vector<SurrogateSample> train_rows, val_rows;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < order.size() - n_val ? train_rows : val_rows).push_back(sorted[order[i]]);

  nn::Dataset raw = to_dataset(train_rows);
  SurrogateModel out;
  out.rate = rate;
  nn::Dataset scaled;
  scaled.inputs = raw.inputs;
  scaled.targets = raw.targets;
  for (Eigen::Index c = 0; c < 7; ++c) {
    std::vector<double> col(static_cast<std::size_t>(raw.inputs.rows()));
    for (Eigen::Index r = 0; r < raw.inputs.rows(); ++r) col[static_cast<std::size_t>(r)] = raw.inputs(r, c);
    const nn::Scaler s = nn::Scaler::fit(col);
    out.model.input_scalers.push_back(s);
    out.feature_min[static_cast<std::size_t>(c)] = *std::min_element(col.begin(), col.end());
    out.feature_max[static_cast<std::size_t>(c)] = *std::max_element(col.begin(), col.end());
    for (Eigen::Index r = 0; r < raw.inputs.rows(); ++r) scaled.inputs(r, c) = s.transform(raw.inputs(r, c));
  }
  std::vector<double> target(train_rows.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i) target[i] = train_rows[i].price;
  out.model.output_scaler = nn::Scaler::fit(target);
  for (Eigen::Index r = 0; r < scaled.targets.rows(); ++r)
    scaled.targets(r, 0) = out.model.output_scaler.transform(raw.targets(r, 0));

  std::vector<std::size_t> dims{7};
  dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
  dims.push_back(1);
  std::vector<nn::Activation> acts(dims.size() - 1, arch.activation);
  acts.front() = nn::Activation::Identity;
  nn::Network net = nn::make_network(dims, acts, cfg.seed);
  // A constant target is matched exactly by a zero output layer; every
  // gradient then vanishes and training keeps the exact fit.
  const auto [lo, hi] = std::minmax_element(target.begin(), target.end());
  if (*hi - *lo <= 1e-12 * std::max(std::fabs(*hi), 1.0)) {
    net.layers.back().weights.setZero();
    net.layers.back().bias.setZero();
  }
  nn::TrainResult trained = nn::train(std::move(net), scaled, cfg);
  out.model.net = std::move(trained.net);
  out.loss_history = std::move(trained.loss_history);
  out.train_rmse = rmse_of(out.model, train_rows);
  out.validation_rmse = val_rows.empty() ? out.train_rmse : rmse_of(out.model, val_rows);
  return out;
}

std::vector<ExtrapolationWarning> check_extrapolation(const OptionChain& chain, const SurrogateModel& surrogate) {
  std::vector<ExtrapolationWarning> out;
  const double spot = chain.state().spot;
  const bool rate_differs = std::abs(chain.state().rate - surrogate.rate) > 1e-12;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const double t = chain[i].maturity();
    const double m = log_moneyness(spot, chain[i].strike);
    std::string reason;
    const auto add = [&](const std::string& part) { reason += (reason.empty() ? "" : "; ") + part; };
    if (t < surrogate.feature_min[5] || t > surrogate.feature_max[5])
      add("maturity " + io::format_double(t) + " outside [" + io::format_double(surrogate.feature_min[5]) + ", " +
          io::format_double(surrogate.feature_max[5]) + "]");
    if (m < surrogate.feature_min[6] || m > surrogate.feature_max[6])
      add("moneyness " + io::format_double(m) + " outside [" + io::format_double(surrogate.feature_min[6]) + ", " +
          io::format_double(surrogate.feature_max[6]) + "]");
    if (rate_differs)
      add("chain rate " + io::format_double(chain.state().rate) + " differs from training rate " +
          io::format_double(surrogate.rate));
    if (!reason.empty()) out.push_back({i, reason});
  }
  return out;
}

ChainPricer surrogate_pricer(const SurrogateModel& surrogate) {
  const auto model = std::make_shared<const nn::ScaledNetwork>(surrogate.model);
  return [model](const HestonParams& eta, const OptionChain& chain) {
    const double spot = chain.state().spot;
    const auto n = static_cast<Eigen::Index>(chain.size());
    nn::Matrix x(n, 7);
    const auto p = eta.to_array();
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& q = chain[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < 5; ++c) x(r, c) = p[static_cast<std::size_t>(c)];
      x(r, 5) = q.maturity();
      x(r, 6) = log_moneyness(spot, q.strike);
    }
    std::vector<double> prices = model->predict(x);
    for (double& v : prices) v *= spot;
    return prices;
  };
}

SurrogateCalibration surrogate_calibrate(const OptionChain& chain, const SurrogateModel& surrogate,
                                         const ParamBounds& bounds, const CalibrationWeights& weights,
                                         const DeConfig& de) {
  SurrogateCalibration out;
  out.warnings = check_extrapolation(chain, surrogate);
  out.result = calibrate_with(make_objective(chain, weights, surrogate_pricer(surrogate)), bounds, de);
  out.result.method = "surrogate-de";
  if (out.result.wall_seconds > 0.0)
    out.evaluations_per_second = static_cast<double>(out.result.evaluations) / out.result.wall_seconds;
  return out;
}

}  // namespace hdc
