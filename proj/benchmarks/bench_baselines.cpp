#include <benchmark/benchmark.h>

#include "dpc/baselines.hpp"
#include "dpc/simulation.hpp"

namespace {

void BM_CrossSpectrum(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const dpc::SeriesPanel panel = dpc::generate_panel(T, 17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpc::estimate_cross_spectrum(panel, {}));
  }
}
BENCHMARK(BM_CrossSpectrum)->Arg(100)->Arg(500);

void BM_BdpcFit(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const int M = static_cast<int>(state.range(1));
  const dpc::SeriesPanel panel = dpc::generate_panel(T, 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpc::bdpc_fit(panel, M));
  }
}
BENCHMARK(BM_BdpcFit)->Args({100, 10})->Args({500, 10})->Args({500, 50});

void BM_RunStudy(benchmark::State& state) {
  dpc::McConfig config;
  config.T = 100;
  config.replications = static_cast<int>(state.range(0));
  config.seed = 1;
  config.methods = {{dpc::Method::Dpc, 5}, {dpc::Method::Opc, 5}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpc::run_study(config));
  }
}
BENCHMARK(BM_RunStudy)->Arg(10);

}  // namespace
