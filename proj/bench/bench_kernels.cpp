// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "sgb/ensemble.hpp"
#include "sgb/noise.hpp"

namespace {

sgb::GridSpec bench_grid(int n_x) { return sgb::GridSpec::with_parabolic_dt(-16.0, 16.0, n_x, 0.25, sgb::Boundary::periodic); }

void BM_RectangleNoise(benchmark::State& state) {
  const auto g = bench_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgb::generate_rectangle_noise(g, 7));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.n_x) * g.n_t);
}

void BM_RectangleNoiseSerial(benchmark::State& state) {
  const auto g = bench_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgb::generate_rectangle_noise_serial(g, 7));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.n_x) * g.n_t);
}

void BM_SeriesNoiseFft(benchmark::State& state) {
  const auto g = bench_grid(static_cast<int>(state.range(0)));
  const auto basis = sgb::BasisFamily::default_for(g, g.n_x);
  for (auto _ : state) benchmark::DoNotOptimize(sgb::generate_series_noise(g, basis, 7));
}

void BM_SeriesNoiseDirect(benchmark::State& state) {
  const auto g = bench_grid(static_cast<int>(state.range(0)));
  const auto basis = sgb::BasisFamily::default_for(g, g.n_x);
  for (auto _ : state) benchmark::DoNotOptimize(sgb::generate_series_noise_direct(g, basis, 7));
}

sgb::ProblemSpec bench_spec() {
  sgb::ProblemSpec s;
  s.coeff_bbar = sgb::Coefficient::constant(1.0);
  s.u0 = sgb::InitialData::parse("bump:1,0,2");
  return s;
}

void BM_Ensemble(benchmark::State& state) {
  const auto g = bench_grid(128);
  sgb::EnsembleOptions o;
  o.n_paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sgb::run_ensemble(bench_spec(), g, o));
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto g = bench_grid(128);
  sgb::EnsembleOptions o;
  o.n_paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sgb::run_ensemble_serial(bench_spec(), g, o));
}

}  // namespace

BENCHMARK(BM_RectangleNoise)->Arg(128)->Arg(256);
BENCHMARK(BM_RectangleNoiseSerial)->Arg(128)->Arg(256);
BENCHMARK(BM_SeriesNoiseFft)->Arg(128);
BENCHMARK(BM_SeriesNoiseDirect)->Arg(128);
BENCHMARK(BM_Ensemble)->Arg(16);
BENCHMARK(BM_EnsembleSerial)->Arg(16);

BENCHMARK_MAIN();
