// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any fail.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <heston_deepcal/calibration.hpp>
#include <heston_deepcal/heston_pricer.hpp>
#include <heston_deepcal/mc_oracle.hpp>
#include <heston_deepcal/micronet.hpp>
#include <heston_deepcal/optimizers.hpp>
#include <heston_deepcal/random.hpp>
#include <heston_deepcal/surrogate.hpp>
#include <heston_deepcal/synthetic.hpp>

#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace hdc;
using Clock = std::chrono::steady_clock;

namespace {

const MarketState kState{100.0, 0.03, "2025-01-02"};
const HestonParams kParams{2.0, 0.04, 0.3, -0.7, 0.04};
const std::vector<double> kStrikes{80.0, 90.0, 100.0, 110.0, 120.0};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome pricer_vs_monte_carlo() {
  const auto t0 = Clock::now();
  McConfig mc;
  mc.n_paths = 200000;
  mc.n_steps = 200;
  const auto est = mc_call_prices(kStrikes, kState, kParams, 0.5, mc);
  double worst = 0.0;
  for (std::size_t i = 0; i < kStrikes.size(); ++i) {
    const double z = std::abs(call_price(kStrikes[i], kState, kParams, 0.5) - est[i].value) / est[i].std_error;
    worst = std::max(worst, z);
  }
  const double t = seconds_since(t0);
  return {worst <= 3.0 && t < 60.0, "max |z| = " + fmt(worst) + " SE, " + fmt(t) + " s"};
}

Outcome black_scholes_limit() {
  const HestonParams p{2.0, 0.04, 1e-4, 0.0, 0.04};
  const double diff = std::abs(call_price(100.0, kState, p, 0.5) - bs_call(100.0, kState, 0.2, 0.5));
  return {diff < 1e-3, "|heston - bs| = " + fmt(diff)};
}

Outcome node_doubling() {
  QuadratureConfig fine;
  fine.nodes = 2000;
  double worst = 0.0;
  for (double k : kStrikes)
    worst = std::max(worst, std::abs(call_price(k, kState, kParams, 0.5) - call_price(k, kState, kParams, 0.5, fine)));
  return {worst < 1e-6, "max change = " + fmt(worst)};
}

bool near_relu_kink(const nn::Network& net, const nn::Matrix& x) {
  const auto cache = nn::forward(net, x);
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    if (net.layers[l].activation_in == nn::Activation::Relu && (cache.z[l].array().abs() < 1e-6).any()) return true;
  return false;
}

Outcome gradient_checks() {
  using nn::Activation;
  const std::vector<std::vector<Activation>> combos{
      {Activation::Identity, Activation::Tanh, Activation::Relu},
      {Activation::Identity, Activation::Sigmoid, Activation::Tanh},
      {Activation::Identity, Activation::Relu, Activation::Sigmoid},
      {Activation::Identity, Activation::Tanh, Activation::Tanh},
      {Activation::Identity, Activation::Sigmoid, Activation::Sigmoid}};
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto& acts = combos[(seed - 1) % combos.size()];
    std::uint64_t draw = seed;
    nn::Network net;
    nn::Matrix x(12, 3);
    do {
      net = nn::make_network({3, 8, 6, 1}, acts, draw);
      CounterRng rng(draw, 1);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
      draw += 1000;
    } while (near_relu_kink(net, x));
    nn::Matrix y(12, 1);
    CounterRng rng(seed, 2);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
    worst = std::max(worst, oracle::gradient_check(net, x, y, 1e-6));
  }
  return {worst < 1e-5, "max relative error = " + fmt(worst) + " over 10 nets"};
}

Outcome optimizer_identities() {
  const nn::AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  std::vector<double> x{0.0};
  const std::vector<double> g{1.0};
  nn::AdamState st;
  nn::adam_update(x, g, st, cfg);
  const double first = std::abs(x[0]);
  bool ok = std::abs(first - cfg.lr) <= cfg.lr * 1e-7;

  double ref = -first, m1 = 0.1, m2 = 0.001;
  for (int t = 2; t <= 3; ++t) {
    nn::adam_update(x, g, st, cfg);
    m1 = 0.9 * m1 + 0.1;
    m2 = 0.999 * m2 + 0.001;
    ref -= 0.1 * (m1 / (1.0 - std::pow(0.9, t))) / (std::sqrt(m2 / (1.0 - std::pow(0.999, t))) + 1e-8);
  }
  const double unrolled = std::abs(x[0] - ref);
  ok = ok && unrolled <= 1e-12;

  std::vector<double> w{1.0};
  for (int i = 0; i < 2; ++i) {
    const std::vector<double> grad{w[0]};
    nn::sgd_update(w, grad, 0.5);
  }
  ok = ok && w[0] == 0.25;
  return {ok, "adam t=1 step " + fmt(first) + ", 3-step diff " + fmt(unrolled) + ", sgd w = " + fmt(w[0])};
}

Outcome kaiming_variance() {
  const auto layer = nn::kaiming_init(2, 50000, 2025);
  const double n = static_cast<double>(layer.weights.size());
  const double mean = layer.weights.sum() / n;
  const double var = (layer.weights.array() - mean).square().sum() / (n - 1.0);
  return {std::abs(var - 1.0) <= 0.03, "sample variance = " + fmt(var) + " over 1e5 weights"};
}

Outcome optimizer_benchmarks() {
  const Bounds box5{std::vector<double>(5, -5.0), std::vector<double>(5, 5.0)};
  auto t0 = Clock::now();
  const Objective rosen = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const std::vector<double> start{-1.2, 1.0, 0.0, 0.0, 0.0};
  const auto nm = nelder_mead(rosen, start, {}, box5);
  const double t_nm = seconds_since(t0);

  t0 = Clock::now();
  DeConfig de;
  de.pop_size = 40;
  de.f_weight = 0.8;
  de.crossover = 0.9;
  de.max_gens = 200;
  de.tol = 0.0;
  const auto sphere = differential_evolution(
      [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
      },
      box5, de);
  const double t_de = seconds_since(t0);
  return {nm.value < 1e-8 && sphere.value < 1e-6 && t_nm < 10.0 && t_de < 10.0,
          "nelder-mead rosenbrock " + fmt(nm.value) + " (" + fmt(t_nm) + " s), de sphere " + fmt(sphere.value) +
              " (" + fmt(t_de) + " s)"};
}

Outcome calibration_recovery() {
  const auto t0 = Clock::now();
  const std::vector<double> days{182.0};
  const auto chain = synthetic_chain(kState, kParams, days, linspace(80.0, 120.0, 20));
  const auto r = calibrate(chain, default_param_bounds(), {}, DeConfig{});
  const double t = seconds_since(t0);
  return {r.objective < 1e-2 && t < 300.0, "objective = " + fmt(r.objective) + ", " + fmt(t) + " s"};
}

Outcome surrogate_speed() {
  SamplingSpec spec;
  spec.n_samples = 2000;
  auto cfg = default_surrogate_train_config();
  cfg.epochs = 20;
  const auto model = train_surrogate(gen_synthetic(spec).samples, {}, cfg);

  const MarketState zero_rate{100.0, 0.0, "2025-01-02"};
  const std::vector<double> days{91.0, 182.0};
  const auto chain = synthetic_chain(zero_rate, kParams, days, linspace(85.0, 115.0, 10));
  const auto analytic = make_objective(chain, {}, analytic_pricer());
  const auto surrogate = make_objective(chain, {}, surrogate_pricer(model));

  const auto b = default_param_bounds();
  std::vector<std::array<double, 5>> points(1000);
  CounterRng rng(77, 0);
  for (auto& p : points)
    for (std::size_t k = 0; k < 5; ++k) p[k] = rng.uniform(b.lower[k], b.upper[k]);

  double sink = 0.0;
  auto t0 = Clock::now();
  for (const auto& p : points) sink += analytic(p);
  const double t_analytic = seconds_since(t0);
  t0 = Clock::now();
  for (const auto& p : points) sink += surrogate(p);
  const double t_surrogate = seconds_since(t0);
  const double ratio = t_analytic / t_surrogate;
  return {ratio >= 50.0 && std::isfinite(sink),
          "speed ratio = " + fmt(ratio) + " (analytic " + fmt(t_analytic) + " s, surrogate " + fmt(t_surrogate) +
              " s per 1000 evaluations)"};
}

struct PipelineRun {
  int code = -1;
  std::string report;
};

PipelineRun run_pipeline_cli(const std::string& cli, const fs::path& chain, const fs::path& out) {
  const int code = shell(cli + " -q pipeline --chain " + chain.string() + " --report " + out.string());
  return {code, code == 0 ? slurp(out) : std::string()};
}

Outcome hybrid_direction(const PipelineRun& run) {
  if (run.code != 0) return {false, "pipeline exited with " + std::to_string(run.code)};
  const auto j = nlohmann::json::parse(run.report);
  const double trad = j.at("traditional").at("test").at("rmse");
  const double dl = j.at("deep_learning").at("test").at("rmse");
  return {dl * 5.0 <= trad, "test RMSE traditional " + fmt(trad) + " vs deep learning " + fmt(dl) + " (ratio " +
                                fmt(trad / dl) + ")"};
}

Outcome no_harm(const PipelineRun& run) {
  if (run.code != 0) return {false, "pipeline exited with " + std::to_string(run.code)};
  const auto j = nlohmann::json::parse(run.report);
  const double trad = j.at("traditional").at("test").at("rmse");
  const double dl = j.at("deep_learning").at("test").at("rmse");
  return {dl <= trad + 1e-6, "test RMSE traditional " + fmt(trad) + " vs deep learning " + fmt(dl)};
}

Outcome determinism(const PipelineRun& a, const PipelineRun& b) {
  if (a.code != 0 || b.code != 0) return {false, "pipeline failed"};
  return {a.report == b.report, std::to_string(a.report.size()) + " bytes, " +
                                    (a.report == b.report ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli;
  std::string data;
  app.add_option("--cli", cli, "path to the heston-deepcal executable")->required()->check(CLI::ExistingFile);
  app.add_option("--data", data, "bundled data directory")->required()->check(CLI::ExistingDirectory);
  CLI11_PARSE(app, argc, argv);

  const fs::path work = fs::temp_directory_path() / ("hdc_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << std::endl;
  };

  report(1, "pricer agrees with Monte Carlo", pricer_vs_monte_carlo);
  report(2, "Black-Scholes degeneracy", black_scholes_limit);
  report(3, "quadrature self-convergence", node_doubling);
  report(4, "backprop vs finite differences", gradient_checks);
  report(5, "Adam/SGD identities", optimizer_identities);
  report(6, "Kaiming statistics", kaiming_variance);
  report(7, "optimizer benchmarks", optimizer_benchmarks);
  report(8, "calibration self-recovery", calibration_recovery);

  const auto perturbed = fs::path(data) / "perturbed_chain.csv";
  const auto first = run_pipeline_cli(cli, perturbed, work / "report_a.json");
  const auto second = run_pipeline_cli(cli, perturbed, work / "report_b.json");
  const auto control = run_pipeline_cli(cli, fs::path(data) / "heston_chain.csv", work / "report_control.json");
  report(9, "hybrid test RMSE at least 5x lower", [&] { return hybrid_direction(first); });
  report(10, "no harm on an unperturbed chain", [&] { return no_harm(control); });
  report(11, "surrogate speed ratio", surrogate_speed);
  report(12, "pipeline reports byte-identical", [&] { return determinism(first, second); });

  fs::remove_all(work);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
