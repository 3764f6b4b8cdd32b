#include <benchmark/benchmark.h>

#include "dpc/banded.hpp"
#include "dpc/rng.hpp"
#include "dpc/simulation.hpp"
#include "dpc/solver.hpp"

namespace {

void BM_FitComponent(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const dpc::SeriesPanel panel = dpc::generate_panel(T, 99);
  dpc::SolverConfig config;
  config.k = k;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpc::fit_component(panel, config));
  }
}
BENCHMARK(BM_FitComponent)
    ->Args({100, 1})
    ->Args({100, 5})
    ->Args({100, 10})
    ->Args({500, 5});

void BM_BandedSolve(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::Index bw = state.range(1);
  dpc::Rng rng(7);
  Eigen::MatrixXd beta(3, bw + 1);
  for (Eigen::Index j = 0; j < 3; ++j) {
    for (Eigen::Index i = 0; i <= bw; ++i) beta(j, i) = rng.next_normal();
  }
  const dpc::SymmetricBandMatrix a = dpc::build_d(beta, n - bw);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = rng.next_normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpc::solve_banded_spd(a, rhs, "bench"));
  }
}
BENCHMARK(BM_BandedSolve)->Args({512, 5})->Args({2048, 10})->Args({8192, 10});

void BM_UpdateBetaAlpha(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const dpc::SeriesPanel panel = dpc::generate_panel(T, 3);
  dpc::SolverConfig config;
  config.k = 5;
  const Eigen::VectorXd f = dpc::initial_factor(panel, config, false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpc::update_beta_alpha(panel, f));
  }
}
BENCHMARK(BM_UpdateBetaAlpha)->Arg(100)->Arg(1000);

}  // namespace
