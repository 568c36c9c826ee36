// Serial reference vs OpenMP benchmark runner, plus the inner kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "covfam/bench.hpp"

namespace {

using namespace covfam;

DenseMatrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

const BenchProblem& problem() {
  static const BenchProblem p = [] {
    SyntheticFieldSpec spec;
    spec.n = 100;
    spec.r = 6;
    return make_problem(SyntheticField(spec));
  }();
  return p;
}

void BM_RunBenchmarkSerial(benchmark::State& state) {
  const auto mode = state.range(0) ? BenchMode::kIdentification : BenchMode::kInterpolation;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_benchmark_serial(problem(), all_methods(), mode));
  }
}
BENCHMARK(BM_RunBenchmarkSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RunBenchmarkParallel(benchmark::State& state) {
  const auto mode = state.range(0) ? BenchMode::kIdentification : BenchMode::kInterpolation;
  BenchOptions options;
  options.threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_benchmark(problem(), all_methods(), mode, options));
  }
}
BENCHMARK(BM_RunBenchmarkParallel)
    ->ArgsProduct({{0, 1}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_FrobDistLowrank(benchmark::State& state) {
  const DenseMatrix y = gaussian(state.range(0), 10, 1);
  const DenseMatrix z = gaussian(state.range(0), 10, 2);
  for (auto _ : state) benchmark::DoNotOptimize(frob_dist_sq_lowrank(y, z));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FrobDistLowrank)->RangeMultiplier(2)->Range(256, 8192)->Complexity(benchmark::oN);

void BM_Identify1p(benchmark::State& state) {
  const FactorPoint a(gaussian(state.range(0), 10, 3));
  const FactorPoint b(gaussian(state.range(0), 10, 4));
  const auto c = SampleCovariance::from_factor(gaussian(state.range(0), 10, 5));
  for (auto _ : state) benchmark::DoNotOptimize(identify_1p(a, b, c));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Identify1p)->RangeMultiplier(2)->Range(256, 8192)->Complexity(benchmark::oN);

void BM_Evaluate(benchmark::State& state) {
  const auto surface = build_surface(problem().grid, all_methods()[static_cast<std::size_t>(state.range(0))]);
  state.SetLabel(surface.method().name());
  double t = 0.0;
  for (auto _ : state) {
    t = t > 3.9 ? 0.0 : t + 0.137;
    benchmark::DoNotOptimize(surface.evaluate(t, 0.5 * t));
  }
}
BENCHMARK(BM_Evaluate)->DenseRange(0, 7);

void BM_Identify(benchmark::State& state) {
  const auto surface = build_surface(problem().grid, all_methods()[static_cast<std::size_t>(state.range(0))]);
  state.SetLabel(surface.method().name());
  IdentifyOptions options;
  options.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(identify(surface, problem().tests.front().target, options));
  }
}
BENCHMARK(BM_Identify)->DenseRange(0, 7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
