#include <benchmark/benchmark.h>

#include <vector>

#include "relosc/functional.hpp"
#include "relosc/optimize.hpp"
#include "relosc/path.hpp"
#include "relosc/rng.hpp"

using namespace relosc;

namespace {

std::vector<double> random_slopes(int N, int n, double spread) {
  Rng rng(11);
  std::vector<double> s(static_cast<std::size_t>(N * n));
  for (double& v : s) v = rng.uniform(-spread, spread);
  return s;
}

void BM_ProjectExact(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0)), n = static_cast<int>(state.range(1));
  const auto s = random_slopes(N, n, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(project_slopes(s, n, 1.0));
  state.SetComplexityN(N);
}
BENCHMARK(BM_ProjectExact)->ArgsProduct({{64, 256, 1024, 4096}, {1, 2}})->Complexity();

void BM_ProjectDykstra(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0)), n = static_cast<int>(state.range(1));
  const auto s = random_slopes(N, n, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(project_slopes_dykstra(s, n, 1.0));
}
BENCHMARK(BM_ProjectDykstra)->ArgsProduct({{64, 256}, {1, 2}});

void BM_Objective(benchmark::State& state) {
  const auto inst = builtin_instance("cosine-desk");
  const auto p = sample_path(inst, static_cast<int>(state.range(0)), 3, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(objective(inst, 0.3, 1.2, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Objective)->Range(64, 4096);

void BM_Gradient(benchmark::State& state) {
  const auto inst = builtin_instance("cosine-desk");
  const auto p = sample_path(inst, static_cast<int>(state.range(0)), 3, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(inst, 0.3, 1.2, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gradient)->Range(64, 4096);

void BM_MinimizeLocal(benchmark::State& state) {
  const auto inst = builtin_instance("cosine-desk");
  MinimizeOptions o;
  o.N = static_cast<int>(state.range(0));
  const auto start = sample_path(inst, o.N, 5, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(minimize_local(inst, 0.3, 1.2, start, o));
}
BENCHMARK(BM_MinimizeLocal)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
