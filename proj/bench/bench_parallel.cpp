#include <benchmark/benchmark.h>
#include <omp.h>

#include "hjb/oracles.hpp"
#include "hjb/rate_control.hpp"
#include "hjb/series_kernel.hpp"
#include "hjb/simulate.hpp"
#include "hjb/sweep.hpp"

using namespace hjb;

namespace {

const RateSeries& unit_rate() {
  static const RateSeries rate = build_rate(build_kernel(ModelParams(2, 1.0, 1.0)));
  return rate;
}

SimConfig paths_config(std::size_t n_paths) {
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_paths = n_paths;
  cfg.seed = 1;
  cfg.y0 = {0.0, 0.0};
  return cfg;
}

SweepSpec sweep_spec() { return {{1, 2, 4, 10, 40, 100}, {0.5, 1.0, 2.0, 5.0}, uniform_grid(0.0, 10.0, 400), {}}; }

void BM_PathsSerial(benchmark::State& state) {
  const auto cfg = paths_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_paths_serial(unit_rate(), cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PathsParallel(benchmark::State& state) {
  const auto cfg = paths_config(static_cast<std::size_t>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(run_paths(unit_rate(), cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepSerial(benchmark::State& state) {
  const auto spec = sweep_spec();
  for (auto _ : state) benchmark::DoNotOptimize(sweep_rate_serial(spec));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto spec = sweep_spec();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_rate(spec));
}

void BM_RateEval(benchmark::State& state) {
  const auto& rate = unit_rate();
  double r = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rate.rate_coeff(r));
    r = r < 0.999 ? r + 1e-3 : 0.0;
  }
}

}  // namespace

BENCHMARK(BM_PathsSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PathsParallel)->ArgsProduct({{2000}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RateEval);

BENCHMARK_MAIN();
