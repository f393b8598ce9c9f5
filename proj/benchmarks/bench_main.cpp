#include <benchmark/benchmark.h>

#include <levymax/inequalities.hpp>
#include <levymax/ito.hpp>
#include <levymax/qge.hpp>
#include <levymax/rng.hpp>

using namespace levymax;

static void BM_Philox(benchmark::State& state) {
  Philox4x32 g(StreamKey{1, 0, 0});
  for (auto _ : state) benchmark::DoNotOptimize(g());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Philox);

static void BM_Uniform01(benchmark::State& state) {
  Philox4x32 g(StreamKey{1, 0, 0});
  for (auto _ : state) benchmark::DoNotOptimize(g.uniform01());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Uniform01);

static void BM_SampleJumpPath(benchmark::State& state) {
  const auto marks = MarkSpace::finite({{"a", static_cast<double>(state.range(0)), Vector::Ones(4)}});
  std::uint32_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_jump_path(marks, 1.0, 3, r++));
}
BENCHMARK(BM_SampleJumpPath)->Arg(1)->Arg(16)->Arg(256);

static void BM_IntegrateCompensated(benchmark::State& state) {
  const auto marks = MarkSpace::finite({{"a", 8.0, Vector::Ones(4)}});
  const auto xi = mark_proportional(4, 1.0);
  const auto grid = uniform_grid(1.0, static_cast<std::size_t>(state.range(0)));
  std::uint32_t r = 0;
  for (auto _ : state) {
    const auto path = sample_jump_path(marks, 1.0, 3, r++);
    benchmark::DoNotOptimize(integrate_compensated(xi, path, marks, grid));
  }
}
BENCHMARK(BM_IntegrateCompensated)->Arg(16)->Arg(256);

static void BM_Convolve(benchmark::State& state) {
  const auto marks = MarkSpace::finite({{"a", 8.0, Vector::Ones(4)}});
  const auto xi = mark_proportional(4, 1.0);
  const auto grid = uniform_grid(1.0, 64);
  const auto a = Semigroup::matrix(-Matrix::Identity(4, 4) + 0.1 * Matrix::Ones(4, 4), 0.5);
  std::uint32_t r = 0;
  for (auto _ : state) {
    const auto path = sample_jump_path(marks, 1.0, 3, r++);
    benchmark::DoNotOptimize(convolve(xi, path, marks, a, grid));
  }
}
BENCHMARK(BM_Convolve);

static void BM_ItoResidualJump(benchmark::State& state) {
  const NormedSpace space = NormedSpace::lq(3, 4);
  const auto marks = MarkSpace::finite({{"a", 4.0, Vector::Constant(3, 0.3)}});
  const auto phi = TestFunction::power_norm(space, 3);
  Integrand x;
  x.dim = 3;
  x.xi = mark_proportional(3, 1.0);
  const auto grid = uniform_grid(1.0, 16);
  std::uint32_t r = 0;
  for (auto _ : state) {
    const auto path = sample_jump_path(marks, 1.0, 3, r++);
    benchmark::DoNotOptimize(ito_residual_jump(phi, Vector::Constant(3, 0.1), x, path, marks, grid));
  }
}
BENCHMARK(BM_ItoResidualJump);

static void BM_NonlinearTerm(benchmark::State& state) {
  const SpectralGrid grid(static_cast<std::size_t>(state.range(0)));
  const auto theta = qge::random_band_limited(grid, 8, 1.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(qge::nonlinear_term(grid, theta));
}
BENCHMARK(BM_NonlinearTerm)->Arg(32)->Arg(64)->Arg(128);

static void BM_QgeRun(benchmark::State& state) {
  qge::RunConfig c;
  c.n = 64;
  c.horizon = 0.1;
  c.n_steps = 50;
  c.noise = {{{{{1, 0}, {0, 1}}, 4.0, 1.0}}, 0.25, true};
  std::uint32_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(qge::run(c, r++));
}
BENCHMARK(BM_QgeRun)->Unit(benchmark::kMillisecond);

static void BM_BdgReport(benchmark::State& state) {
  ExperimentSpec s{NormedSpace::lq(1, 2), MarkSpace::finite({{"u", 1.0, Vector::Ones(1)}}), {"marks", 1.0},
                   std::nullopt, std::nullopt};
  s.n_paths = 2000;
  s.jobs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(bdg_report(s));
}
BENCHMARK(BM_BdgReport)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
