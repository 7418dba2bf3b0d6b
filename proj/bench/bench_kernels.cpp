#include <benchmark/benchmark.h>

#include "prism/gemm.hpp"
#include "prism/genmat.hpp"
#include "prism/iterations.hpp"
#include "prism/sketch.hpp"

namespace {

using namespace prism;

void set_flops(benchmark::State& state, double per_iter) {
  state.counters["GFLOPS"] =
      benchmark::Counter(per_iter, benchmark::Counter::kIsIterationInvariantRate,
                         benchmark::Counter::kIs1000);
}

void BM_GemmSerialReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Mat a = gaussian_matrix(n, n, 1), b = gaussian_matrix(n, n, 2);
  Mat c(n, n);
  for (auto _ : state) {
    gemm_serial_reference(n, n, n, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  set_flops(state, 2e-9 * double(n) * double(n) * double(n));
}
BENCHMARK(BM_GemmSerialReference)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

// Second argument: thread cap (0 = OpenMP default).
void BM_GemmBlocked(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int saved = kernel_threads();
  set_kernel_threads(static_cast<int>(state.range(1)));
  const Mat a = gaussian_matrix(n, n, 1), b = gaussian_matrix(n, n, 2);
  Mat c(n, n);
  for (auto _ : state) {
    gemm_blocked(n, n, n, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  set_kernel_threads(saved);
  set_flops(state, 2e-9 * double(n) * double(n) * double(n));
}
BENCHMARK(BM_GemmBlocked)
    ->ArgsProduct({{64, 128, 256, 512, 1024}, {1, 0}})
    ->Unit(benchmark::kMillisecond);

Mat symmetric_residual(std::size_t n) {
  Mat r = gaussian_matrix(n, n, 3);
  r = (0.5 / double(n)) * (r + transpose(r));
  return r;
}

void BM_TracesExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Mat r = symmetric_residual(n);
  for (auto _ : state) benchmark::DoNotOptimize(exact_power_traces(r, 6).t.data());
}
BENCHMARK(BM_TracesExact)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);

void BM_TracesSketched(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Mat r = symmetric_residual(n);
  const SketchMatrix s = gaussian_sketch(kPracticalSketchRows, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sketched_power_traces(r, s, 6).t.data());
}
BENCHMARK(BM_TracesSketched)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);

// Whole polar solves on a 512 x 256 Gaussian; 0 = taylor, 1 = prism-exact, 2 = prism-sketched.
void BM_PolarSolve(benchmark::State& state) {
  const Mat a = gaussian_matrix(512, 256, 5);
  const CoefficientStrategy strategies[] = {Taylor{}, PrismExact{}, PrismSketched{8, 1}};
  const auto& s = strategies[state.range(0)];
  IterationOptions opts;
  opts.record_walltime = false;
  std::size_t iters = 0;
  for (auto _ : state) {
    const auto res = polar_iterate(a, s, opts);
    iters = res.report.iterations();
    benchmark::DoNotOptimize(res.primary.data());
  }
  state.SetLabel(strategy_name(s));
  state.counters["iterations"] = double(iters);
}
BENCHMARK(BM_PolarSolve)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
