#include <levelvol/domain.hpp>
#include <levelvol/field.hpp>
#include <levelvol/volume.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace levelvol;

static void BM_MonteCarloCurve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = make_standard_form(StandardForm::b, 1, n - 1, n, 4.0);
  const Domain d = make_ball(Point::Zero(n), 0.8);
  const auto levels = refine_near(0.0, 0.2, 24);
  const std::uint64_t samples = 1'000'000;
  for (auto _ : state) benchmark::DoNotOptimize(volume_curve_mc(f, d, levels, samples, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * samples));
}
BENCHMARK(BM_MonteCarloCurve)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_InterpolantEval(benchmark::State& state) {
  const int m = 64;
  const auto f = make_standard_form(StandardForm::b, 2, 1, 3, 4.0);
  const VoxelGrid g = sample_to_grid(f, {m, m, m}, {2.0 / m, 2.0 / m, 2.0 / m}, Point::Constant(3, -1.0 + 1.0 / m));
  const auto interp = make_voxel_interpolant(g);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::vector<Point> pts(4096, Point(3));
  for (auto& p : pts) p << u(rng), u(rng), u(rng);
  for (auto _ : state)
    for (const auto& p : pts) benchmark::DoNotOptimize(interp.eval(p));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pts.size()));
}
BENCHMARK(BM_InterpolantEval);

static void BM_CumulativeDvh(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  VoxelGrid grid{{64, 64, 64}, {1.0, 1.0, 1.0}, Point::Zero(3), {}};
  grid.values.resize(64 * 64 * 64);
  for (auto& v : grid.values) v = g(rng);
  std::vector<double> levels;
  for (int i = 0; i < 200; ++i) levels.push_back(-3.0 + 0.03 * i);
  for (auto _ : state) benchmark::DoNotOptimize(cumulative_dvh(grid, levels));
}
BENCHMARK(BM_CumulativeDvh)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
