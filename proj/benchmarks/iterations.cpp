#include <benchmark/benchmark.h>

#include "nmfmm/datagen.hpp"
#include "nmfmm/linalg.hpp"
#include "nmfmm/solvers.hpp"
#include "nmfmm/squarem.hpp"

namespace {

using namespace nmfmm;

// Square-ish problem: n = 2m, rank fixed at 10.
struct Problem {
  Matrix v;
  FactorPair x;
};

Problem make_problem(std::size_t m) {
  SolverConfig c;
  c.rank = 10;
  c.seed = 7;
  return {generate_dense_uniform(2 * m, m, 0.0, 1.0, 1), initialize_factors(2 * m, m, c)};
}

void set_counters(benchmark::State& state, const Problem& p) {
  state.counters["nm"] = static_cast<double>(p.v.size());
  state.SetComplexityN(static_cast<benchmark::IterationCount>(p.v.size()));
}

void BM_FrobeniusResidual(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(frobenius_residual(p.v, p.x.w, p.x.h));
  set_counters(state, p);
}

void BM_Inom(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(inom_iterate(p.v, p.x));
  set_counters(state, p);
}

void BM_Parinom(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  StepOptions o;
  o.concurrent = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(parinom_iterate(p.v, p.x, o));
  set_counters(state, p);
}

void BM_Mu(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mu_iterate(p.v, p.x));
  set_counters(state, p);
}

void BM_FastHals(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fast_hals_iterate(p.v, p.x));
  set_counters(state, p);
}

void BM_SquaremParinom(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  const FixedPointMap map = parinom_map();
  for (auto _ : state) benchmark::DoNotOptimize(squarem_step(p.v, p.x, map));
  set_counters(state, p);
}

}  // namespace

BENCHMARK(BM_FrobeniusResidual)->RangeMultiplier(2)->Range(64, 512)->Complexity();
BENCHMARK(BM_Inom)->RangeMultiplier(2)->Range(64, 512)->Complexity();
BENCHMARK(BM_Parinom)->ArgsProduct({{64, 256, 512}, {0, 1}});
BENCHMARK(BM_Mu)->RangeMultiplier(2)->Range(64, 512)->Complexity();
BENCHMARK(BM_FastHals)->RangeMultiplier(2)->Range(64, 512)->Complexity();
BENCHMARK(BM_SquaremParinom)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK_MAIN();
