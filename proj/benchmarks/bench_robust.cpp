#include <benchmark/benchmark.h>

#include "dpc/robust.hpp"
#include "dpc/rng.hpp"
#include "dpc/simulation.hpp"

namespace {

void BM_MScale(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  dpc::Rng rng(5);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.next_normal();
  const dpc::MScaleSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpc::m_scale(x, spec));
  }
}
BENCHMARK(BM_MScale)->Arg(256)->Arg(4096)->Arg(65536);

void BM_FitSComponent(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const dpc::SeriesPanel panel = dpc::generate_one_factor_panel(T, 10, 11);
  dpc::SolverConfig config;
  config.k = k;
  const dpc::MScaleSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpc::fit_s_component(panel, config, spec));
  }
}
BENCHMARK(BM_FitSComponent)->Args({250, 1})->Args({250, 5});

}  // namespace
