#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <heston_deepcal/calibration.hpp>
#include <heston_deepcal/error.hpp>
#include <heston_deepcal/synthetic.hpp>

using namespace hdc;

namespace {

const MarketState kState{100.0, 0.03, "2025-01-02"};
const HestonParams kTruth{2.0, 0.04, 0.3, -0.7, 0.04};

OptionChain truth_chain(std::size_t strikes = 10) {
  const std::vector<double> days{91.0};
  return synthetic_chain(kState, kTruth, days, linspace(85.0, 115.0, strikes));
}

}  // namespace

TEST(Objective, PerfectFitIsZero) {
  const auto chain = truth_chain();
  const auto f = make_objective(chain, {}, [](const HestonParams&, const OptionChain& c) { return c.last_prices(); });
  EXPECT_EQ(f(kTruth.to_array()), 0.0);
}

TEST(Objective, SingleQuoteResidual) {
  const OptionChain chain(kState, {{100.0, 30.0, 5.0}});
  const auto f = make_objective(chain, {}, [](const HestonParams&, const OptionChain&) {
    return std::vector<double>{8.0};
  });
  EXPECT_DOUBLE_EQ(f(kTruth.to_array()), 3.0);
}

TEST(Objective, TruthIsMinimal) {
  const auto chain = truth_chain();
  const auto f = make_objective(chain, {}, analytic_pricer());
  const double at_truth = f(kTruth.to_array());
  EXPECT_LT(at_truth, 1e-8);
  for (std::size_t axis = 0; axis < 5; ++axis) {
    auto x = kTruth.to_array();
    x[axis] *= 1.05;
    EXPECT_GT(f(x), at_truth) << kParamNames[axis];
  }
}

TEST(Objective, InvalidParamsAreInfinite) {
  const auto f = make_objective(truth_chain(), {}, analytic_pricer());
  const std::array<double, 5> bad{2.0, -0.04, 0.3, -0.7, 0.04};
  EXPECT_TRUE(std::isinf(f(bad)));
}

TEST(Objective, QuoteOrderDoesNotMatter) {
  const auto chain = truth_chain();
  std::vector<OptionQuote> shuffled(chain.quotes().begin(), chain.quotes().end());
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 3, shuffled.end());
  const OptionChain permuted(kState, shuffled);
  const HestonParams eta{1.5, 0.05, 0.4, -0.5, 0.03};
  EXPECT_EQ(make_objective(chain, {}, analytic_pricer())(eta.to_array()),
            make_objective(permuted, {}, analytic_pricer())(eta.to_array()));

  const std::vector<double> model{1.0, 2.0, 3.0, 4.0}, market{1.5, 1.0, 3.5, 2.0}, w{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> pm{4.0, 2.0, 1.0, 3.0}, pk{2.0, 1.0, 1.5, 3.5}, pw{0.4, 0.2, 0.1, 0.3};
  EXPECT_DOUBLE_EQ(weighted_rmse(model, market, w), weighted_rmse(pm, pk, pw));
}

TEST(Objective, WeightScalingKeepsDeTrajectory) {
  const auto chain = truth_chain(6);
  CalibrationWeights w;
  w.mode = WeightMode::Custom;
  w.custom = {1.0, 2.0, 1.0, 3.0, 1.0, 0.5};
  CalibrationWeights scaled = w;
  for (auto& v : scaled.custom) v *= 7.0;
  DeConfig cfg;
  cfg.max_gens = 5;
  cfg.pop_size = 10;
  const auto a = differential_evolution(make_objective(chain, w, analytic_pricer()), default_param_bounds(), cfg);
  const auto b = differential_evolution(make_objective(chain, scaled, analytic_pricer()), default_param_bounds(), cfg);
  EXPECT_EQ(a.x, b.x);
  ASSERT_EQ(a.best_history.size(), b.best_history.size());
  for (std::size_t i = 0; i < a.best_history.size(); ++i)
    EXPECT_NEAR(a.best_history[i], b.best_history[i], 1e-12 * a.best_history[i]);
}

TEST(Weights, ResolveModes) {
  const OptionChain chain(kState, {{90.0, 30.0, 10.0}, {100.0, 30.0, 0.0}, {110.0, 30.0, 1.0}});
  const auto uniform = CalibrationWeights{}.resolve(chain);
  for (double v : uniform) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);

  CalibrationWeights inv;
  inv.mode = WeightMode::InversePrice;
  const auto w = inv.resolve(chain);
  // 1/10, 1/0.01, 1/1 before normalization
  const double total = 0.1 + 100.0 + 1.0;
  EXPECT_NEAR(w[0], 0.1 / total, 1e-15);
  EXPECT_NEAR(w[1], 100.0 / total, 1e-15);
  EXPECT_NEAR(w[2], 1.0 / total, 1e-15);

  CalibrationWeights custom;
  custom.mode = WeightMode::Custom;
  custom.custom = {1.0, 2.0};
  EXPECT_THROW(custom.resolve(chain), Error);
  custom.custom = {1.0, 0.0, 1.0};
  EXPECT_THROW(custom.resolve(chain), Error);
}

TEST(Weights, ModeNames) {
  EXPECT_EQ(parse_weight_mode("inverse-price"), WeightMode::InversePrice);
  EXPECT_EQ(to_string(WeightMode::Uniform), "uniform");
  EXPECT_THROW(parse_weight_mode("equal"), Error);
  EXPECT_EQ(parse_calibration_method("nelder_mead"), CalibrationMethod::NelderMead);
  EXPECT_EQ(parse_calibration_method("de"), CalibrationMethod::DifferentialEvolution);
}

TEST(ParamBounds, Validation) {
  EXPECT_NO_THROW(validate_param_bounds(default_param_bounds()));
  auto b = default_param_bounds();
  b.lower[3] = -1.5;
  EXPECT_THROW(validate_param_bounds(b), Error);
  b = default_param_bounds();
  b.lower[0] = 0.0;
  EXPECT_THROW(validate_param_bounds(b), Error);
  EXPECT_THROW(validate_param_bounds(Bounds{{1.0}, {2.0}}), Error);
}

TEST(Calibrate, DifferentialEvolutionRecoversFit) {
  const auto chain = truth_chain();
  const auto de = calibrate(chain, default_param_bounds(), {}, DeConfig{});
  EXPECT_LT(de.objective, 1e-2);
  EXPECT_EQ(de.method, "de");
  EXPECT_TRUE(default_param_bounds().contains(de.params.to_array()));
  for (std::size_t i = 1; i < de.best_history.size(); ++i) EXPECT_LE(de.best_history[i], de.best_history[i - 1]);

  NelderMeadSettings nm;
  nm.start = HestonParams{kTruth.kappa * 1.2, kTruth.theta * 0.8, kTruth.sigma * 1.2, kTruth.rho * 0.8,
                          kTruth.v0 * 1.2};
  const auto local = calibrate(chain, default_param_bounds(), {}, nm);
  EXPECT_LE(local.objective, 10.0 * std::max(de.objective, 1e-12));
  EXPECT_EQ(local.method, "nelder-mead");
  EXPECT_TRUE(default_param_bounds().contains(local.params.to_array()));
}

TEST(Calibrate, CollapsedBoundsReturnThePoint) {
  const auto chain = truth_chain(5);
  const auto p = kTruth.to_array();
  const Bounds point{{p.begin(), p.end()}, {p.begin(), p.end()}};
  DeConfig cfg;
  cfg.max_gens = 3;
  const auto r = calibrate(chain, point, {}, cfg);
  EXPECT_EQ(r.params, kTruth);
  EXPECT_DOUBLE_EQ(r.objective, make_objective(chain, {}, analytic_pricer())(p));
  const auto nm = calibrate(chain, point, {}, NelderMeadSettings{});
  EXPECT_EQ(nm.params, kTruth);
}
