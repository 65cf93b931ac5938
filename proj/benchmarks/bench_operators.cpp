#include <benchmark/benchmark.h>

#include "spe/dynamics.hpp"

namespace {

spe::State bench_state(const spe::DomainSpec& dom) {
  std::mt19937_64 rng(7);
  return spe::random_state(rng, dom);
}

void BM_ApplyB(benchmark::State& state) {
  const spe::DomainSpec dom(1.0, 1.0, static_cast<int>(state.range(0)),
                            static_cast<int>(state.range(0)));
  const spe::Operators ops(dom);
  const spe::State y = bench_state(dom);
  const spe::State yt = bench_state(dom);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops.apply_B(y, yt));
  }
}
BENCHMARK(BM_ApplyB)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_DeterministicStep(benchmark::State& state) {
  const spe::DomainSpec dom(1.0, 1.0, 8, 8);
  const spe::Operators ops(dom);
  const spe::State y = bench_state(dom);
  const spe::State zero(dom);
  for (auto _ : state) {
    const spe::State f = ops.forcing(y, {});
    benchmark::DoNotOptimize(spe::step(y, f, zero, 1e-3));
  }
}
BENCHMARK(BM_DeterministicStep);

void BM_BOracle(benchmark::State& state) {
  const spe::DomainSpec dom(1.0, 1.0, 3, 3);
  const spe::State y = bench_state(dom);
  const spe::State yt = bench_state(dom);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spe::b_oracle(y, yt));
  }
}
BENCHMARK(BM_BOracle);

}  // namespace

BENCHMARK_MAIN();
