#include <gtest/gtest.h>

#include <cmath>

#include "hs/error.hpp"
#include "hs/experiments.hpp"
#include "hs/io.hpp"

using namespace hs;

namespace {

ExperimentSpec small_spec() {
  return parse_experiment_spec(R"(
[experiment]
profile = ones
sizes = 24x24, 48x48
family = rademacher
epsilon = 0.1
trials = 2
seed = 5
ladder_depth = 2

[inversion]
points = 301
certify_stride = 50
)");
}

}  // namespace

TEST(ExperimentSpec, ParsesAndRoundTrips) {
  const ExperimentSpec spec = small_spec();
  EXPECT_EQ(spec.sizes.size(), 2u);
  EXPECT_EQ(spec.sizes[1], (std::pair<std::size_t, std::size_t>{48, 48}));
  EXPECT_EQ(spec.trials, 2u);
  EXPECT_EQ(spec.master_seed, 5u);
  EXPECT_FALSE(spec.pipeline.has_value());
  const ExperimentSpec again = parse_experiment_spec(experiment_spec_text(spec));
  EXPECT_EQ(experiment_spec_text(again), experiment_spec_text(spec));
}

TEST(ExperimentSpec, PipelineSectionAndSolverKeys) {
  const ExperimentSpec spec = parse_experiment_spec(R"(
[experiment]
profile = uniform:0,2
sizes = 10x20
family = gaussian
complex = true
[pipeline]
eta_n = 0.5
center = false
[solver]
tol = 1e-11
newton = false
[inversion]
eta = 0.02, 0.01
extrapolation = last
)");
  ASSERT_TRUE(spec.pipeline.has_value());
  EXPECT_EQ(spec.pipeline->eta_n, 0.5);
  EXPECT_FALSE(spec.pipeline->apply_center);
  EXPECT_TRUE(spec.sampler.complex_entries);
  EXPECT_EQ(spec.solver.tol, 1e-11);
  EXPECT_FALSE(spec.solver.newton);
  EXPECT_EQ(spec.inversion.eta_sequence, (std::vector<double>{0.02, 0.01}));
  EXPECT_EQ(spec.inversion.extrapolation, Extrapolation::last_value);
  const ExperimentSpec off = parse_experiment_spec("[experiment]\nsizes = 4x4\n[pipeline]\neta_n = 2\nenabled = false\n");
  EXPECT_FALSE(off.pipeline.has_value());
}

TEST(ExperimentSpec, RejectsBadInput) {
  for (const char* text : {"[experiment]\nsizes = 4y4\n", "[experiment]\nsizes = 4x4\nbogus = 1\n",
                           "[nowhere]\nx = 1\n", "[experiment]\nsizes = 4x4\ntrials = -1\n",
                           "[experiment]\nsizes = 4x4\nepsilon = 2\n", "[experiment]\nprofile = twos\nsizes = 4x4\n",
                           "[experiment]\n", "[experiment\nsizes = 4x4\n"}) {
    EXPECT_THROW(parse_experiment_spec(text), Error) << text;
  }
}

TEST(DefaultRange, CoversMarchenkoPasturSupport) {
  const auto [lo, hi] = default_x_range(WeightProfile::validate(Eigen::MatrixXd::Ones(10, 40)));
  EXPECT_LT(lo, 0.0);
  EXPECT_GT(hi, 1.5 * 1.5);
}

TEST(RunExperiment, ProducesTrustedRowsAndIsDeterministic) {
  const ExperimentSpec spec = small_spec();
  const ComparisonReport a = run_experiment(spec);
  ASSERT_EQ(a.rows.size(), 4u);
  ASSERT_EQ(a.sizes.size(), 2u);
  for (const auto& row : a.rows) {
    EXPECT_TRUE(row.error.empty()) << row.error;
    EXPECT_TRUE(row.trusted);
    EXPECT_LT(row.rho_max, 1.0);
    EXPECT_LE(row.d_value, 2.0 * row.ks + row.d_tail);
  }
  for (const auto& s : a.sizes) EXPECT_NEAR(s.total_mass, 1.0, 1e-2);
  EXPECT_EQ(a.ladder.size(), 2u);
  const ComparisonReport b = run_experiment(spec);
  EXPECT_EQ(report_csv(a), report_csv(b));
}

TEST(RunExperiment, FailuresAreRecordedNotThrown) {
  // Every column of the spiked block profile exceeds the plan bound, so the
  // truncated profile loses columns.
  ExperimentSpec spec = small_spec();
  spec.profile = ProfileGenerator::parse("block:1,5");
  spec.sizes = {{8, 8}};
  spec.epsilon = 0.5;
  spec.ladder_depth = 0;
  const ComparisonReport r = run_experiment(spec);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_FALSE(r.rows[0].error.empty());
  EXPECT_FALSE(r.rows[0].trusted);
  EXPECT_NE(r.sizes[0].error.find("ZeroColumnAfterTruncation"), std::string::npos);
}

TEST(RunExperiment, CoveredSpikesMatchTheUnspikedReport) {
  ExperimentSpec plain = small_spec();
  plain.sizes = {{64, 64}};
  plain.trials = 3;
  plain.ladder_depth = 0;
  plain.epsilon = 0.1;
  ExperimentSpec spiked = plain;
  spiked.profile = ProfileGenerator::parse("spiked:4,50");
  const ComparisonReport a = run_experiment(plain);
  const ComparisonReport b = run_experiment(spiked);
  EXPECT_EQ(b.sizes[0].M, 1.0);
  EXPECT_NEAR(a.sizes[0].median_ks, b.sizes[0].median_ks, 4.0 / 64.0 + 0.02);
  EXPECT_NEAR(a.sizes[0].median_d, b.sizes[0].median_d, 0.01);
}
