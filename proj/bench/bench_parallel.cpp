#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "prefgame/parallel.hpp"
#include "prefgame/solvers.hpp"

using namespace prefgame;

namespace {

std::vector<Policy> random_policies(std::size_t n, std::size_t count) {
  std::mt19937_64 gen(1);
  std::exponential_distribution<double> e(1.0);
  std::vector<Policy> out;
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> x(n);
    double s = 0.0;
    for (auto& v : x) s += v = e(gen) + 1e-12;
    for (auto& v : x) v /= s;
    out.emplace_back(x);
  }
  return out;
}

void BM_BatchGapSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = make_game({GameKind::random_skew, n, 7, {}});
  const auto policies = random_policies(n, 4096);
  for (auto _ : state) benchmark::DoNotOptimize(batch_duality_gaps_serial(g, policies));
  state.SetItemsProcessed(state.iterations() * 4096);
}

void BM_BatchGapParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = make_game({GameKind::random_skew, n, 7, {}});
  const auto policies = random_policies(n, 4096);
  for (auto _ : state) benchmark::DoNotOptimize(batch_duality_gaps_parallel(g, policies));
  state.SetItemsProcessed(state.iterations() * 4096);
}

// One ONPO run of T = 1000 per seed, the unit of work the experiment runner distributes.
auto onpo_job(std::size_t n) {
  return [n](std::size_t seed) {
    SolverConfig c;
    c.algorithm = Algorithm::onpo;
    c.iterations = 1000;
    c.theorem_eta = true;
    return onpo_run(make_game({GameKind::random_skew, n, seed, {}}), c).records.back().gap_avg;
  };
}

void BM_RunBatchSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(serial_map(32, onpo_job(n)));
  state.SetItemsProcessed(state.iterations() * 32);
}

void BM_RunBatchParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(parallel_map(32, onpo_job(n)));
  state.SetItemsProcessed(state.iterations() * 32);
}

}  // namespace

BENCHMARK(BM_BatchGapSerial)->Arg(5)->Arg(20)->Arg(100)->UseRealTime();
BENCHMARK(BM_BatchGapParallel)->Arg(5)->Arg(20)->Arg(100)->UseRealTime();
BENCHMARK(BM_RunBatchSerial)->Arg(5)->Arg(20)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunBatchParallel)->Arg(5)->Arg(20)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
