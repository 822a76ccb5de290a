#include <benchmark/benchmark.h>

#include "ucgrad/backprop.hpp"
#include "ucgrad/estimators.hpp"
#include "ucgrad/rng.hpp"
#include "ucgrad/tasks.hpp"

using namespace ucgrad;

static void BM_GaussianDraws(benchmark::State& state) {
  rng::CounterStream stream(1);
  double acc = 0.0;
  for (auto _ : state) acc += stream.next_gaussian();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_GaussianDraws);

static void BM_UnrollToy2d(benchmark::State& state) {
  tasks::Toy2dRegressionTask task(10000);
  const Vector theta = task.init_params();
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(unroll(task, task.init_state(), theta, k).loss_sum);
  }
  state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(BM_UnrollToy2d)->Arg(10)->Arg(100)->Arg(1000);

static void BM_PesStepInfluence(benchmark::State& state) {
  tasks::InfluenceBalancingTask task(1 << 30);
  const int n = static_cast<int>(state.range(0));
  NoiseSpec noise{0.1, n, 7};
  ParticleEnsemble ens = make_ensemble(task, n);
  const Vector theta = Vector::Constant(1, 0.5);
  std::uint64_t it = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pes_step(task, ens, theta, 1, noise, it++).grad);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PesStepInfluence)->Arg(64)->Arg(256)->Arg(1024);

static void BM_EsStepToy2d(benchmark::State& state) {
  tasks::Toy2dRegressionTask task(1 << 20);
  const int n = static_cast<int>(state.range(0));
  NoiseSpec noise{1.0, n, 7};
  const Vector theta = task.init_params();
  std::uint64_t it = 0;
  for (auto _ : state) {
    SystemState mean = task.init_state();
    benchmark::DoNotOptimize(es_step(task, mean, theta, 10, noise, it++).grad);
  }
  state.SetItemsProcessed(state.iterations() * n * 10);
}
BENCHMARK(BM_EsStepToy2d)->Arg(16)->Arg(100);

static void BM_RtrlStepInfluence(benchmark::State& state) {
  tasks::InfluenceBalancingTask task(1 << 30);
  const Vector theta = Vector::Constant(1, 0.5);
  SystemState s = task.init_state();
  RtrlState j = make_rtrl_state(task);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rtrl_step(task, s, j, theta, 1).grad);
  }
}
BENCHMARK(BM_RtrlStepInfluence);

static void BM_WindowGradientToy2d(benchmark::State& state) {
  tasks::Toy2dRegressionTask task(10000);
  const Vector theta = task.init_params();
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(window_gradient(task, task.init_state(), theta, k).grad);
  }
}
BENCHMARK(BM_WindowGradientToy2d)->Arg(10)->Arg(100);

BENCHMARK_MAIN();
