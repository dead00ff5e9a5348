#include <benchmark/benchmark.h>

#include "hs/fixed_point.hpp"
#include "hs/profiles.hpp"
#include "hs/stieltjes.hpp"

namespace {

hs::WeightProfile uniform_profile(std::size_t n) {
  return hs::ProfileGenerator::parse("uniform:0,2").generate(n, 2 * n, 1);
}

void BM_SolveSinglePoint(benchmark::State& state) {
  const hs::WeightProfile D = uniform_profile(static_cast<std::size_t>(state.range(0)));
  hs::SolverConfig cfg;
  cfg.certify = false;
  const hs::FixedPointSolver solver(D, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(hs::SpectralPoint(1.0, 0.05)));
}
BENCHMARK(BM_SolveSinglePoint)->Arg(50)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_SolveCertified(benchmark::State& state) {
  const hs::WeightProfile D = uniform_profile(static_cast<std::size_t>(state.range(0)));
  const hs::FixedPointSolver solver(D, hs::SolverConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(hs::SpectralPoint(1.0, 0.05)));
}
BENCHMARK(BM_SolveCertified)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_GridContinuation(benchmark::State& state) {
  const hs::WeightProfile D = uniform_profile(100);
  hs::SolverConfig cfg;
  cfg.certify = false;
  cfg.continuation = state.range(0) != 0;
  const hs::ZGrid grid = hs::ZGrid::horizontal(-0.5, 6.0, 200, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(hs::solve_grid(D, grid, cfg));
}
BENCHMARK(BM_GridContinuation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DensityCurveOnes(benchmark::State& state) {
  const hs::WeightProfile D = hs::ProfileGenerator::parse("ones").generate(256, 256, 0);
  hs::InversionConfig inv;
  inv.x_grid = hs::InversionConfig::uniform_grid(-0.2, 4.5, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hs::density_curve(D, inv, hs::SolverConfig{}));
}
BENCHMARK(BM_DensityCurveOnes)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
