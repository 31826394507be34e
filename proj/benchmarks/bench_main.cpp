#include "freegeom/ensembles.hpp"
#include "freegeom/entropy.hpp"
#include "freegeom/evaluator.hpp"
#include "freegeom/pressure.hpp"
#include "freegeom/transport.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace freegeom;
namespace fm = freegeom::formulas;

static void BM_SampleGUE(benchmark::State& state) {
  Rng rng(RngSeed{1, 0});
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_gue(n, rng));
}
BENCHMARK(BM_SampleGUE)->Arg(32)->Arg(128)->Arg(256);

static void BM_EvalResolvent(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Evaluator ev(fm::sum({fm::resolvent(0), fm::resolvent_well(1, 0.5)}), n);
  MatrixTuple x = sample_ginibre_tuple(n, 2, RngSeed{2, 0});
  for (auto _ : state) benchmark::DoNotOptimize(ev.eval(x).value);
}
BENCHMARK(BM_EvalResolvent)->Arg(8)->Arg(32)->Arg(64);

static void BM_PressureDirect(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(pressure_direct(fm::linear(0), MatrixTuple::zeros(n, 0), n, 1000, RngSeed{3, 0}).value);
}
BENCHMARK(BM_PressureDirect)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Wasserstein(benchmark::State& state) {
  const int bins = static_cast<int>(state.range(0));
  SpectralMeasure a = SpectralMeasure::gaussian(0.0, 1.0, -8.0, 8.0, bins);
  SpectralMeasure b = SpectralMeasure::gaussian(1.0, 2.0, -12.0, 12.0, bins);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein_1d(a, b).distance);
}
BENCHMARK(BM_Wasserstein)->Arg(256)->Arg(2048);

static void BM_LogEnergy(benchmark::State& state) {
  SpectralMeasure s = SpectralMeasure::semicircle(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(log_energy(s));
}
BENCHMARK(BM_LogEnergy)->Arg(256)->Arg(1024);

static void BM_HeatFlow(benchmark::State& state) {
  SpectralMeasure g = SpectralMeasure::gaussian(0.0, 1.0, -12.0, 12.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(heat_flow(g, 1.0));
}
BENCHMARK(BM_HeatFlow)->Arg(512)->Arg(2048);

static void BM_Legendre(benchmark::State& state) {
  GridFunction f = GridFunction::sample([](double x) { return std::abs(x) + 0.5 * x * x; }, -3.0, 3.0,
                                        static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(legendre(f));
}
BENCHMARK(BM_Legendre)->Arg(401)->Arg(1601);
BENCHMARK_MAIN();
