#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "defidx/bounds.hpp"
#include "defidx/channels.hpp"
#include "defidx/decouple.hpp"
#include "defidx/grid_table.hpp"
#include "defidx/partition.hpp"
#include "defidx/support.hpp"
#include "defidx/weyl.hpp"

using namespace defidx;

static void BM_PointDefect(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double c = -n * (n - 4) / 4.0 - 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(point_defect(n, c));
    c += 1e-6;
  }
}
BENCHMARK(BM_PointDefect)->DenseRange(3, 8);

static void BM_WeylClassify(benchmark::State& state) {
  const double q0 = static_cast<double>(state.range(0)) / 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(weyl_classify_numeric(inverse_square_problem(q0), SpectralSign::Plus));
}
BENCHMARK(BM_WeylClassify)->Arg(-8)->Arg(0)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Certificate(benchmark::State& state) {
  SingularityConfig cfg;
  cfg.dimension = 3;
  for (int i = 0; i < state.range(0); ++i)
    cfg.singularities.push_back({{3.0 * i, 0, 0}, InverseSquarePoint{-0.25 * (i % 12), 1.0, {}}});
  AggregateOptions opt;
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(essential_selfadjointness(cfg, opt));
}
BENCHMARK(BM_Certificate)->RangeMultiplier(4)->Range(1, 256)->Unit(benchmark::kMicrosecond);

static void BM_CutoffJet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CutoffFunction phi = build_cutoff(ComplementOfBall{Point(n, 0.0), 3}, Ball{Point(n, 0.0), 1}, 1.0, n);
  Point x(static_cast<std::size_t>(n), 0.3);
  x[0] = 1.2;
  benchmark::DoNotOptimize(phi.jet(x));
  for (auto _ : state) benchmark::DoNotOptimize(phi.jet(x));
}
BENCHMARK(BM_CutoffJet)->DenseRange(1, 3);

static void BM_LatticePartition(benchmark::State& state) {
  const LatticePartition p = lattice_partition(static_cast<int>(state.range(0)));
  Point x(static_cast<std::size_t>(state.range(0)), 0.17);
  benchmark::DoNotOptimize(p.evaluate(x));
  for (auto _ : state) benchmark::DoNotOptimize(p.evaluate(x));
}
BENCHMARK(BM_LatticePartition)->DenseRange(1, 3);

static void BM_LpCheck(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const double h = 3.0 / static_cast<double>(k);
  GridTable t = sample_grid(
      [](std::span<const double> x) { return 1.0 / std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); },
      {-1.5, -1.5, -1.5}, {h, h, h}, {k, k, k});
  t.singular_sites.push_back({{0, 0, 0}, 1.0, 1.0, 0.25});
  for (auto _ : state) benchmark::DoNotOptimize(loc_unif_Lp_check(t, 2, 100.0));
}
BENCHMARK(BM_LpCheck)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

static void BM_SupportLaws(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto make = [&] {
    GridFunction f;
    f.shape = {k, k};
    f.lo = {0.0, 0.0};
    f.spacing = {1.0 / k, 1.0 / k};
    f.values.resize(k * k);
    for (auto& v : f.values) v = u(rng) > 0.6 ? u(rng) : 0.0;
    f.mask.assign(k * k, true);
    return f;
  };
  const GridFunction f = make(), g = make();
  for (auto _ : state) benchmark::DoNotOptimize(check_support_laws(f, g));
}
BENCHMARK(BM_SupportLaws)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
