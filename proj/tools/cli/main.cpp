#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include <heston_deepcal/error.hpp>
#include <heston_deepcal/parallel.hpp>

#include "commands.hpp"

namespace {

// 0 success, 2 validation, 3 numerical, 4 I/O.
int exit_code(hdc::ErrorCategory category) {
  switch (category) {
    case hdc::ErrorCategory::Validation: return 2;
    case hdc::ErrorCategory::Numerical: return 3;
    case hdc::ErrorCategory::Io: return 4;
  }
  return 3;
}

template <class Command>
CLI::App* add_command(CLI::App& parent, const std::string& name, const std::string& help, Command& cmd,
                      const hdc::cli::GlobalOptions& g, int& status) {
  CLI::App* sub = parent.add_subcommand(name, help);
  cmd.attach(*sub);
  sub->callback([&cmd, &g, &status] {
    if (g.threads > 0) hdc::set_default_threads(g.threads);
    status = cmd.run(g);
  });
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hdc::cli;
  CLI::App app{"Heston pricing, calibration and network-corrected calibration"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--threads", g.threads, "worker threads (count); 0 uses all cores")
      ->envname("HESTON_DEEPCAL_THREADS")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "global seed (integer) for every random stage")->capture_default_str();
  app.add_flag("-q,--quiet", g.quiet, "suppress progress notes on stderr");

  int status = 0;
  PriceCommand price;
  McCheckCommand mc_check;
  CalibrateCommand calibrate;
  SurrogateGenCommand sur_gen;
  SurrogateTrainCommand sur_train;
  SurrogateCalibrateCommand sur_cal;
  PanTrainCommand pan_train;
  PipelineCommand pipeline;
  MetricsCommand metrics;
  SynthChainCommand synth;

  add_command(app, "price", "price European calls with the characteristic-function pricer", price, g, status);
  add_command(app, "mc-check", "compare analytic prices with a Monte Carlo estimate", mc_check, g, status);
  add_command(app, "calibrate", "fit Heston parameters to an option chain", calibrate, g, status);
  CLI::App* surrogate = app.add_subcommand("surrogate", "surrogate pricing network workflow");
  surrogate->require_subcommand(1);
  add_command(*surrogate, "gen", "generate a synthetic pricing dataset", sur_gen, g, status);
  add_command(*surrogate, "train", "train a surrogate network on a dataset", sur_train, g, status);
  add_command(*surrogate, "calibrate", "calibrate through a frozen surrogate network", sur_cal, g, status);
  add_command(app, "pan-train", "fit the price approximator network to one maturity slice", pan_train, g, status);
  add_command(app, "pipeline", "run calibration plus network correction and report error metrics", pipeline, g,
              status);
  add_command(app, "metrics", "RMSE, MAE and MRE of model against market prices", metrics, g, status);
  add_command(app, "synth-chain", "write a synthetic option chain priced by the Heston model", synth, g, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const hdc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return status;
}
