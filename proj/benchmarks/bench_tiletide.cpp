#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "tiletide/decomp.hpp"
#include "tiletide/experiments.hpp"

using namespace tiletide;

namespace {

struct Instance {
  TileFamily family;
  CoeffSequence coeffs;
};

Instance random_instance(int max_tiles, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TileFamily f = random_family(rng, RandomFamilyOptions{max_tiles});
  CoeffSequence a = random_coeffs(rng, f, 1, 0.1);
  return {std::move(f), std::move(a)};
}

GridFunction window(const GridSpec& g, double a, double b) { return GridSet::from_intervals(g, {{a, b}}).indicator(); }

}  // namespace

static void BM_Size(benchmark::State& state) {
  const Instance in = random_instance(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(size(in.family, in.coeffs, 1));
}
BENCHMARK(BM_Size)->Arg(10)->Arg(20)->Arg(40);

static void BM_SizeExhaustive(benchmark::State& state) {
  const Instance in = random_instance(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(size_exhaustive(in.family, in.coeffs, 1));
}
BENCHMARK(BM_SizeExhaustive)->Arg(10)->Arg(20);

static void BM_EnergyGreedy(benchmark::State& state) {
  const Instance in = random_instance(12, 5);
  for (auto _ : state) benchmark::DoNotOptimize(energy(in.family, in.coeffs, 1, EnergyMode::greedy).value);
}
BENCHMARK(BM_EnergyGreedy);

static void BM_EnergyExhaustive(benchmark::State& state) {
  const Instance in = random_instance(12, 5);
  for (auto _ : state) benchmark::DoNotOptimize(energy(in.family, in.coeffs, 1, EnergyMode::exhaustive).value);
}
BENCHMARK(BM_EnergyExhaustive)->Unit(benchmark::kMillisecond);

static void BM_SplitSparse(benchmark::State& state) {
  const ModelFamilies fam = generate_model_families(ExperimentConfig::default_family_params());
  for (auto _ : state) benchmark::DoNotOptimize(split_sparse(fam.q_family).parts.size());
}
BENCHMARK(BM_SplitSparse)->Unit(benchmark::kMillisecond);

static void BM_FourierCoeffs(benchmark::State& state) {
  const CutoffProfile alpha = CutoffProfile::plateau(8);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        fourier_coeffs(SquareSpec{-7, 1000, 1010, Shift::third}, 4, alpha, default_square_window(), default_square_window()));
}
BENCHMARK(BM_FourierCoeffs)->Unit(benchmark::kMillisecond);

static void BM_DirectTstar(benchmark::State& state) {
  const GridSpec g = make_grid(-8.0, std::ldexp(1.0, -10), 16 * 1024);
  const GridFunction ind = window(g, 0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(direct_Tstar(ind, ind, ind, 0.5, ScaleRange{-6, 0}));
}
BENCHMARK(BM_DirectTstar)->Unit(benchmark::kMillisecond);

static void BM_ModelForm(benchmark::State& state) {
  ModelFamilies fam = generate_model_families(ExperimentConfig::default_family_params());
  const GridSpec g = model_grid(fam);
  const ModelInstance m = make_model_instance(std::move(fam), g, TruncationFunction::constant(g, kScaleMinusInfinity));
  const GridFunction f = window(g, 1020.0, 1028.0);
  for (auto _ : state) benchmark::DoNotOptimize(model_form(m, f, f, f, f));
}
BENCHMARK(BM_ModelForm)->Unit(benchmark::kMillisecond);

static void BM_HullDecompose(benchmark::State& state) {
  const HullSpec h = HullSpec::twelve_point();
  const Rational e(1, 100);
  const ExponentTuple target = make_tuple(1 - e, e / 3, e / 3, e / 3);
  for (auto _ : state) benchmark::DoNotOptimize(convex_decompose(target, h.vertices(), true).feasible);
}
BENCHMARK(BM_HullDecompose);
BENCHMARK_MAIN();
