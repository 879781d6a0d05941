// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to the
// core count; on a single core the two columns should be close.
#include <benchmark/benchmark.h>

#include "optinit/harness.hpp"
#include "optinit/mdp.hpp"
#include "optinit/serial.hpp"

namespace {

using namespace optinit;

const SolverOptions kOpts{1e-8, 1'000'000};

TabularMDP bench_mdp(std::size_t n) {
  return random_mdp(n, 4, 0.95, 99, RandomMdpOptions{1.0, 0.05, 0});
}

void BM_PolicyEvaluationSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TabularMDP mdp = bench_mdp(n);
  const DeterministicPolicy pi = random_policy(n, 4, 5);
  for (auto _ : state) benchmark::DoNotOptimize(serial::policy_evaluation(mdp, pi, kOpts));
}

void BM_PolicyEvaluationParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TabularMDP mdp = bench_mdp(n);
  const DeterministicPolicy pi = random_policy(n, 4, 5);
  for (auto _ : state) benchmark::DoNotOptimize(policy_evaluation(mdp, pi, kOpts));
}

void BM_ValueIterationSerial(benchmark::State& state) {
  const TabularMDP mdp = bench_mdp(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::value_iteration(mdp, kOpts));
}

void BM_ValueIterationParallel(benchmark::State& state) {
  const TabularMDP mdp = bench_mdp(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(mdp, kOpts));
}

ExperimentSpec bench_experiment() {
  ExperimentSpec spec;
  spec.env = CrossingParams{};
  spec.alphas = {0.01};
  spec.n_runs = 4;
  spec.episodes = 5;
  return spec;
}

void BM_HarnessSerial(benchmark::State& state) {
  const ExperimentSpec spec = bench_experiment();
  for (auto _ : state) benchmark::DoNotOptimize(serial::run_experiment(spec));
}

void BM_HarnessParallel(benchmark::State& state) {
  const ExperimentSpec spec = bench_experiment();
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(spec));
}

}  // namespace

BENCHMARK(BM_PolicyEvaluationSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PolicyEvaluationParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValueIterationSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValueIterationParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HarnessSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HarnessParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
