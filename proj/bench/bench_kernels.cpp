// Serial reference vs OpenMP kernels on residual-sized workloads.
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "charflow/kernels.hpp"
#include "charflow/low_discrepancy.hpp"

namespace {

using namespace charflow;

Lattice2D lattice(std::size_t n) { return {0.0, 1.0 / n, n, -1.0, 2.0 / n, n}; }

// A field evaluation with a transcendental call, similar in cost to a builtin residual integrand.
double integrand(double t, double x) { return std::sin(8.0 * x) * std::exp(-t) + std::cbrt(x) * t; }

void BM_TensorSimpsonSerial(benchmark::State& st) {
  const auto lat = lattice(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::tensor_simpson(lat, integrand));
}
void BM_TensorSimpsonOmp(benchmark::State& st) {
  const auto lat = lattice(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::omp::tensor_simpson(lat, integrand));
}

std::vector<kernels::PointPair> pairs(std::size_t n) {
  std::vector<kernels::PointPair> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = halton4(i + 1);
    out[i] = {{h[0], 2.0 * h[1] - 1.0}, {h[2], 2.0 * h[3] - 1.0}};
  }
  return out;
}

void BM_PairGapSerial(benchmark::State& st) {
  const auto p = pairs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::max_pair_gap(p, integrand));
}
void BM_PairGapOmp(benchmark::State& st) {
  const auto p = pairs(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::omp::max_pair_gap(p, integrand));
}

void BM_PairwiseSlopeSerial(benchmark::State& st) {
  const std::size_t n = static_cast<std::size_t>(st.range(0));
  std::vector<double> t(n), v(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) / n, v[i] = integrand(t[i], 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::max_pairwise_slope(t, v));
}
void BM_PairwiseSlopeOmp(benchmark::State& st) {
  const std::size_t n = static_cast<std::size_t>(st.range(0));
  std::vector<double> t(n), v(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) / n, v[i] = integrand(t[i], 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::omp::max_pairwise_slope(t, v));
}

}  // namespace

BENCHMARK(BM_TensorSimpsonSerial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TensorSimpsonOmp)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairGapSerial)->Arg(4096)->Arg(65536)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PairGapOmp)->Arg(4096)->Arg(65536)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PairwiseSlopeSerial)->Arg(1025)->Arg(4097)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PairwiseSlopeOmp)->Arg(1025)->Arg(4097)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
