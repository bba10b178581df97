#include <benchmark/benchmark.h>

#include <cmath>

#include "ultraholo/conjugate.hpp"
#include "ultraholo/flatkernel.hpp"
#include "ultraholo/indices.hpp"
#include "ultraholo/sources.hpp"
#include "ultraholo/weightfn.hpp"
#include "ultraholo/wmatrix.hpp"

using namespace uh;

static void BM_OmegaBinarySearch(benchmark::State& st) {
  auto src = table_source(gevrey(1.0, std::size_t(st.range(0))));
  double t = 0.5 * double(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(omega_M(*src, t));
}
BENCHMARK(BM_OmegaBinarySearch)->Arg(256)->Arg(4096)->Arg(65536);

static void BM_OmegaBruteForce(benchmark::State& st) {
  auto M = gevrey(1.0, std::size_t(st.range(0)));
  double t = 0.5 * double(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(omega_M_bruteforce(M, t));
}
BENCHMARK(BM_OmegaBruteForce)->Arg(256)->Arg(4096)->Arg(65536);

static void BM_PhiStarNumeric(benchmark::State& st) {
  auto w = power(0.5);
  for (auto _ : st) benchmark::DoNotOptimize(phi_star(w, 7.0, ConjMode::Numeric));
}
BENCHMARK(BM_PhiStarNumeric);

static void BM_UpperStarNumeric(benchmark::State& st) {
  auto w = from_sequence(gevrey_source(2.0));
  for (auto _ : st) benchmark::DoNotOptimize(upper_star(w, 0.01, ConjMode::Numeric));
}
BENCHMARK(BM_UpperStarNumeric);

static void BM_MaterializeLevel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(materialize(power(0.5), 1.0, std::size_t(st.range(0)), ConjMode::Numeric));
}
BENCHMARK(BM_MaterializeLevel)->Arg(64)->Arg(512);

static void BM_GammaFn(benchmark::State& st) {
  auto w = power(0.5);
  for (auto _ : st) benchmark::DoNotOptimize(gamma_fn(w).value);
}
BENCHMARK(BM_GammaFn)->Unit(benchmark::kMillisecond);

static void BM_FlatLogAbsG(benchmark::State& st) {
  auto m = build_model(power(0.5), 1.0, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(m.log_abs_G({0.7, 0.3}));
}
BENCHMARK(BM_FlatLogAbsG);

static void BM_FlatModelBuild(benchmark::State& st) {
  auto tau = from_sequence(gevrey_source(1.0));
  for (auto _ : st) benchmark::DoNotOptimize(build_model(tau, 0.5, 1.0).s());
}
BENCHMARK(BM_FlatModelBuild)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
