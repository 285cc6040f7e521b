#include <benchmark/benchmark.h>

#include <heston_deepcal/calibration.hpp>
#include <heston_deepcal/heston_pricer.hpp>
#include <heston_deepcal/mc_oracle.hpp>
#include <heston_deepcal/surrogate.hpp>
#include <heston_deepcal/synthetic.hpp>

using namespace hdc;

namespace {

const MarketState kState{100.0, 0.03, "2025-01-02"};
const HestonParams kParams{2.0, 0.04, 0.3, -0.7, 0.04};

OptionChain bench_chain(double rate = 0.03) {
  const std::vector<double> days{91.0, 182.0};
  return synthetic_chain({100.0, rate, "2025-01-02"}, kParams, days, linspace(85.0, 115.0, 10));
}

void BM_CallPrice(benchmark::State& state) {
  QuadratureConfig quad;
  quad.nodes = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(call_price(100.0, kState, kParams, 0.5, quad));
}
BENCHMARK(BM_CallPrice)->Arg(250)->Arg(1000)->Arg(2000);

void BM_SliceStrike(benchmark::State& state) {
  const SlicePricer slice(kState, kParams, 0.5);
  double k = 80.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(slice.price(k));
    k = k < 120.0 ? k + 0.5 : 80.0;
  }
}
BENCHMARK(BM_SliceStrike);

void BM_PriceChain(benchmark::State& state) {
  const auto chain = bench_chain();
  for (auto _ : state) benchmark::DoNotOptimize(model_prices(chain, kParams));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(chain.size()));
}
BENCHMARK(BM_PriceChain);

void BM_AnalyticObjective(benchmark::State& state) {
  const auto chain = bench_chain();
  const auto f = make_objective(chain, {}, analytic_pricer());
  const auto x = kParams.to_array();
  for (auto _ : state) benchmark::DoNotOptimize(f(x));
}
BENCHMARK(BM_AnalyticObjective);

void BM_SurrogateObjective(benchmark::State& state) {
  SamplingSpec spec;
  spec.n_samples = 500;
  auto cfg = default_surrogate_train_config();
  cfg.epochs = 1;
  const auto model = train_surrogate(gen_synthetic(spec).samples, {}, cfg);
  const auto chain = bench_chain(0.0);
  const auto f = make_objective(chain, {}, surrogate_pricer(model));
  const auto x = kParams.to_array();
  for (auto _ : state) benchmark::DoNotOptimize(f(x));
}
BENCHMARK(BM_SurrogateObjective);

void BM_MonteCarlo(benchmark::State& state) {
  McConfig cfg;
  cfg.n_paths = static_cast<std::size_t>(state.range(0));
  cfg.n_steps = 100;
  const std::vector<double> strikes{90.0, 100.0, 110.0};
  for (auto _ : state) benchmark::DoNotOptimize(mc_call_prices(strikes, kState, kParams, 0.5, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
