#include <random>

#include <benchmark/benchmark.h>

#include "discforge/instance.hpp"
#include "discforge/pseudorandom.hpp"
#include "discforge/regmax.hpp"
#include "discforge/spencer.hpp"

using namespace discforge;

namespace {

Vec random_vec(int m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(m);
  for (int i = 0; i < m; ++i) v(i) = g(rng);
  return v;
}

void BM_LqValueGrad(benchmark::State& state) {
  const Vec y = random_vec(static_cast<int>(state.range(0)), 1);
  const RegParams p{RegKind::kLq, 0.5, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(lq_value_grad(y, p));
}
BENCHMARK(BM_LqValueGrad)->Arg(64)->Arg(512)->Arg(4096);

void BM_SmaxValueGrad(benchmark::State& state) {
  const Vec y = random_vec(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(smax_value_grad(y, 1.0));
}
BENCHMARK(BM_SmaxValueGrad)->Arg(64)->Arg(512)->Arg(4096);

void BM_LambdaParam(benchmark::State& state) {
  const Instance a = gen_gaussian(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(lambda_param(a.entries));
}
BENCHMARK(BM_LambdaParam)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SpencerColor(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Instance a = gen_rademacher(n, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(spencer_color(a).discrepancy);
}
BENCHMARK(BM_SpencerColor)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
