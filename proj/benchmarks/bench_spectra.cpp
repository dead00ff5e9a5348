#include <benchmark/benchmark.h>

#include "hs/metrics.hpp"
#include "hs/profiles.hpp"
#include "hs/random_spectra.hpp"
#include "hs/tightness.hpp"

namespace {

void BM_SampleAndDiagonalize(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const hs::WeightProfile D = hs::ProfileGenerator::parse("ones").generate(n, n, 0);
  hs::EntrySampler sampler;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    sampler.seed = ++seed;
    const Eigen::MatrixXcd X = hs::sample_matrix(n, n, sampler);
    benchmark::DoNotOptimize(hs::hermitian_eigenvalues(hs::build_B(D, X)));
  }
}
BENCHMARK(BM_SampleAndDiagonalize)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_DMetricEmpirical(benchmark::State& state) {
  const hs::WeightProfile D = hs::ProfileGenerator::parse("ones").generate(128, 128, 0);
  const auto spectra = hs::empirical_spectrum(D, hs::EntrySampler{}, std::nullopt, 2, 5);
  const auto i_max = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hs::d_metric(spectra[0], spectra[1], i_max));
}
BENCHMARK(BM_DMetricEmpirical)->Arg(8)->Arg(24)->Arg(96);

void BM_PlanTruncation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const hs::WeightProfile D = hs::ProfileGenerator::parse("uniform:0,4").generate(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(hs::plan_truncation(D, 0.1));
}
BENCHMARK(BM_PlanTruncation)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
