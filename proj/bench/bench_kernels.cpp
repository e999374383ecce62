#include "shls/chain_library.hpp"
#include "shls/continuum.hpp"
#include "shls/process.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>

using namespace shls;

namespace {

continuum::GridField gaussian_field(int n) {
  const continuum::GridSpec spec{3, n, 8.0};
  return continuum::GridField::sample(spec, continuum::gaussian_profile(1.0));
}

std::vector<continuum::Index> centre_nodes(int n) {
  std::vector<continuum::Index> nodes;
  for (int k = -2; k <= 2; ++k) nodes.push_back({n / 2 + k, n / 2, n / 2, 0});
  return nodes;
}

void set_threads(const benchmark::State& st) { omp_set_num_threads(static_cast<int>(st.range(1))); }

void BM_HeatParallel(benchmark::State& st) {
  set_threads(st);
  const auto f = gaussian_field(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(continuum::heat_apply(f, 0.5));
}

void BM_HeatSerial(benchmark::State& st) {
  const auto f = gaussian_field(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(continuum::reference::heat_apply(f, 0.5));
}

void BM_RieszParallel(benchmark::State& st) {
  set_threads(st);
  const int n = static_cast<int>(st.range(0));
  const auto f = gaussian_field(n);
  const auto nodes = centre_nodes(n);
  for (auto _ : st) benchmark::DoNotOptimize(continuum::riesz_apply(f, 1.0, nodes));
}

void BM_RieszSerial(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto f = gaussian_field(n);
  const auto nodes = centre_nodes(n);
  for (auto _ : st) benchmark::DoNotOptimize(continuum::reference::riesz_apply(f, 1.0, nodes));
}

struct PathSetup {
  process::ProcessConfig cfg = process::ProcessConfig::for_chain(spectral::random_reversible_chain(8, 3));
  StateFunction f = spectral::random_zero_mean_function(cfg.chain, 1);
  process::HarmonicIntegrands integ{cfg.dec, f, f, 1.0, 1e3};
};

void BM_PathsParallel(benchmark::State& st) {
  set_threads(st);
  const PathSetup p;
  for (auto _ : st) benchmark::DoNotOptimize(process::sample_paths(p.cfg, st.range(0), p.integ));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_PathsSerial(benchmark::State& st) {
  const PathSetup p;
  for (auto _ : st) benchmark::DoNotOptimize(process::reference::sample_paths(p.cfg, st.range(0), p.integ));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

const int kThreads = std::max(1, omp_get_num_procs());

}  // namespace

BENCHMARK(BM_HeatSerial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HeatParallel)->Args({32, kThreads})->Args({64, kThreads})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RieszSerial)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RieszParallel)->Args({32, kThreads})->Args({48, kThreads})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PathsSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PathsParallel)->Args({2000, kThreads})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
