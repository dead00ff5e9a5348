#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hs/error.hpp"
#include "hs/metrics.hpp"
#include "hs/random_spectra.hpp"
#include "oracles.hpp"

using namespace hs;

namespace {

const EntryFamily kFamilies[] = {EntryFamily::rademacher, EntryFamily::uniform_pm, EntryFamily::gaussian,
                                 EntryFamily::two_point_asym};

WeightProfile ones(long n, long N) { return WeightProfile::validate(Eigen::MatrixXd::Ones(n, N)); }

}  // namespace

TEST(SampleMatrix, RademacherEntriesAreSigns) {
  const Eigen::MatrixXcd X = sample_matrix(20, 30, {EntryFamily::rademacher, 7, false});
  for (Eigen::Index k = 0; k < X.size(); ++k) {
    EXPECT_EQ(std::abs(X(k).real()), 1.0);
    EXPECT_EQ(X(k).imag(), 0.0);
  }
}

TEST(SampleMatrix, SameSeedSameMatrix) {
  for (EntryFamily f : kFamilies) {
    const EntrySampler s{f, 42, true};
    EXPECT_EQ(sample_matrix(9, 11, s), sample_matrix(9, 11, s));
    EXPECT_NE(sample_matrix(9, 11, s), sample_matrix(9, 11, {f, 43, true}));
  }
}

TEST(SampleMatrix, EmpiricalMomentsAreStandard) {
  const std::size_t n = 200, N = 200;
  const double slack = 5.0 / std::sqrt(double(n * N));
  for (EntryFamily f : kFamilies) {
    for (bool complex_entries : {false, true}) {
      const Eigen::MatrixXcd X = sample_matrix(n, N, {f, 2024, complex_entries});
      const cplx mean = X.mean();
      const double second = X.cwiseAbs2().mean();
      EXPECT_LT(std::abs(mean), slack) << family_name(f);
      // Fourth moments of these laws are at most 4.25, so 5 sigma is ~ 10 / sqrt(nN).
      EXPECT_LT(std::abs(second - 1.0), 2.0 * slack) << family_name(f);
    }
  }
  const Eigen::MatrixXcd G = sample_matrix(n, N, {EntryFamily::gaussian, 5, false});
  const double var = G.cwiseAbs2().mean() - std::norm(G.mean());
  EXPECT_GT(var, 0.95);
  EXPECT_LT(var, 1.05);
}

TEST(FamilyNames, RoundTrip) {
  for (EntryFamily f : kFamilies) EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_THROW(parse_family("cauchy"), Error);
}

TEST(TruncatedMoments, RealGaussianMatchesQuadrature) {
  for (double T : {0.5, 1.0, 2.0, 3.5}) {
    const TruncatedMoments m = truncated_moments(EntryLaw::of({EntryFamily::gaussian, 0, false}), T);
    EXPECT_NEAR(m.variance, oracle::truncated_normal_variance(T), 1e-12);
    EXPECT_EQ(m.mean, cplx(0.0, 0.0));
  }
}

TEST(TruncatedMoments, ComplexGaussianAndRealUniformMatchQuadrature) {
  for (double T : {0.3, 1.0, 1.6, 2.5}) {
    const double cg = oracle::simpson([](double r) { return r * r * 2.0 * r * std::exp(-r * r); }, 0.0, T);
    EXPECT_NEAR(truncated_moments(EntryLaw::of({EntryFamily::gaussian, 0, true}), T).variance, cg, 1e-12);
    const double a = std::sqrt(3.0);
    const double cut = std::min(T, a);
    const double uu = oracle::simpson([&](double x) { return x * x / (2.0 * a); }, -cut, cut);
    EXPECT_NEAR(truncated_moments(EntryLaw::of({EntryFamily::uniform_pm, 0, false}), T).variance, uu, 1e-9);
  }
}

TEST(TruncatedMoments, ComplexUniformMatchesGridQuadrature) {
  const double s = std::sqrt(1.5);
  for (double T : {0.5, 1.2, 1.5, 2.0}) {
    // Midpoint rule on a fine grid over the square [-s, s]^2.
    const int K = 2000;
    const double h = 2.0 * s / K;
    double second = 0.0;
    for (int a = 0; a < K; ++a) {
      for (int b = 0; b < K; ++b) {
        const double x = -s + (a + 0.5) * h, y = -s + (b + 0.5) * h;
        if (x * x + y * y <= T * T) second += (x * x + y * y) * h * h;
      }
    }
    second /= 4.0 * s * s;
    EXPECT_NEAR(truncated_moments(EntryLaw::of({EntryFamily::uniform_pm, 0, true}), T).variance, second, 2e-3);
  }
}

TEST(TruncatedMoments, DiscreteLawsAreEnumerated) {
  const EntryLaw two = EntryLaw::of({EntryFamily::two_point_asym, 0, false});
  const TruncatedMoments m = truncated_moments(two, 1.0);
  // Only -1/2 (probability 4/5) survives.
  EXPECT_NEAR(m.mean.real(), -0.4, 1e-15);
  EXPECT_NEAR(m.variance, 0.8 * 0.25 - 0.16, 1e-15);
  EXPECT_NEAR(m.tail_probability, 0.2, 1e-15);
  const TruncatedMoments full = truncated_moments(two, 3.0);
  EXPECT_NEAR(full.mean.real(), 0.0, 1e-15);
  EXPECT_NEAR(full.variance, 1.0, 1e-15);
  EXPECT_THROW(truncated_moments(two, 0.0), Error);
}

TEST(Pipeline, BoundedFamilyIsUntouched) {
  const Eigen::MatrixXcd X = sample_matrix(16, 20, {EntryFamily::rademacher, 1, false});
  const PipelineResult r = truncate_center_rescale(X, {0.5, true, true}, EntryLaw::of({EntryFamily::rademacher, 1, false}));
  EXPECT_GT(r.threshold, 1.0);
  EXPECT_EQ(r.X, X);
  EXPECT_EQ(r.truncated_entries, 0u);
}

TEST(Pipeline, GaussianOutputBoundedByThresholdOverSigma) {
  // n = 4 and eta_n = 1 put the cut at 2.
  const EntrySampler s{EntryFamily::gaussian, 17, false};
  const Eigen::MatrixXcd X = sample_matrix(4, 5000, s);
  const PipelineResult r = truncate_center_rescale(X, {1.0, true, true}, EntryLaw::of(s));
  EXPECT_DOUBLE_EQ(r.threshold, 2.0);
  const double sigma = std::sqrt(oracle::truncated_normal_variance(2.0));
  EXPECT_NEAR(std::sqrt(r.moments.variance), sigma, 1e-12);
  EXPECT_GT(r.truncated_entries, 0u);
  EXPECT_LE(r.X.cwiseAbs().maxCoeff(), 2.0 / sigma * (1.0 + 1e-15));
  EXPECT_LE(r.X.cwiseAbs().maxCoeff(), 2.0 * 2.0 / sigma);
  for (std::size_t i : r.truncated_rows) EXPECT_LT(i, 4u);
}

TEST(Pipeline, ConstantEntriesAreDegenerate) {
  const Eigen::MatrixXcd X = Eigen::MatrixXcd::Constant(3, 4, cplx(0.7, 0.0));
  const PipelineResult r = truncate_center_rescale(X, {1.0, true, true}, EntryLaw::constant(0.7));
  EXPECT_EQ(r.degenerate_entries, 12u);
  EXPECT_EQ(r.X, Eigen::MatrixXcd::Zero(3, 4));
  EXPECT_THROW(truncate_center_rescale(X, {0.0, true, true}, EntryLaw::constant(0.7)), Error);
}

TEST(BuildB, ScalarAndZeroCases) {
  const WeightProfile p = WeightProfile::validate(Eigen::MatrixXd::Constant(1, 1, 2.0));
  const Eigen::MatrixXcd B = build_B(p, Eigen::MatrixXcd::Constant(1, 1, cplx(3.0, 0.0)));
  EXPECT_EQ(B(0, 0), cplx(36.0, 0.0));
  EXPECT_EQ(build_B(ones(3, 4), Eigen::MatrixXcd::Zero(3, 4)), Eigen::MatrixXcd::Zero(3, 3));
  try {
    build_B(ones(3, 4), Eigen::MatrixXcd::Zero(4, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
}

TEST(BuildB, HermitianPsdAndTraceIdentity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd d = oracle::uniform_profile(30, 45, 0.0, 2.0, seed);
    const WeightProfile p = WeightProfile::validate(d);
    const Eigen::MatrixXcd X = sample_matrix(30, 45, {EntryFamily::gaussian, seed, true});
    const Eigen::MatrixXcd B = build_B(p, X);
    EXPECT_LE((B - B.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    double expected = 0.0;
    for (long i = 0; i < 30; ++i)
      for (long j = 0; j < 45; ++j) expected += d(i, j) * d(i, j) * std::norm(X(i, j));
    expected /= 45.0;
    EXPECT_NEAR(B.trace().real(), expected, 1e-12 * expected);
    const auto ev = hermitian_eigenvalues(B);
    const double scale = B.cwiseAbs().maxCoeff();
    EXPECT_GE(ev.front(), -1e-10 * scale);
  }
}

TEST(BuildB, OnesProfileIsSampleCovariance) {
  const Eigen::MatrixXcd X = sample_matrix(5, 8, {EntryFamily::uniform_pm, 3, false});
  const Eigen::MatrixXcd B = build_B(ones(5, 8), X);
  EXPECT_LE((B - X * X.adjoint() / 8.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(HermitianEigen, HandComputedCases) {
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(3, 3);
  D(0, 0) = 3.0;
  D(1, 1) = 1.0;
  D(2, 2) = 2.0;
  const auto a = hermitian_eigenvalues(D);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_NEAR(a[0], 1.0, 1e-14);
  EXPECT_NEAR(a[1], 2.0, 1e-14);
  EXPECT_NEAR(a[2], 3.0, 1e-14);
  Eigen::MatrixXcd M(2, 2);
  M << 2.0, 1.0, 1.0, 2.0;
  const auto b = hermitian_eigenvalues(M);
  EXPECT_NEAR(b[0], 1.0, 1e-14);
  EXPECT_NEAR(b[1], 3.0, 1e-14);
}

TEST(HermitianEigen, TraceAndReconstruction) {
  const Eigen::MatrixXcd X = sample_matrix(40, 60, {EntryFamily::gaussian, 8, true});
  const Eigen::MatrixXcd B = build_B(ones(40, 60), X);
  const HermitianEigen eig = hermitian_eigen(B, true);
  const double scale = B.cwiseAbs().maxCoeff();
  double sum = 0.0;
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    sum += eig.values[k];
    if (k) EXPECT_LE(eig.values[k - 1], eig.values[k]);
  }
  EXPECT_NEAR(sum, B.trace().real(), 1e-9 * 40 * scale);
  const Eigen::VectorXd lambda = Eigen::Map<const Eigen::VectorXd>(eig.values.data(), 40);
  const Eigen::MatrixXcd R = eig.vectors * lambda.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
  EXPECT_LE((R - B).cwiseAbs().maxCoeff(), 1e-9 * scale);
  EXPECT_THROW(hermitian_eigenvalues(Eigen::MatrixXcd::Zero(2, 3)), Error);
}

TEST(SingularValues, AscendingAndSquaresAreEigenvalues) {
  const Eigen::MatrixXcd X = sample_matrix(6, 9, {EntryFamily::gaussian, 4, false});
  const auto s = singular_values(X);
  const auto ev = hermitian_eigenvalues(X * X.adjoint());
  ASSERT_EQ(s.size(), 6u);
  for (std::size_t k = 0; k < 6; ++k) {
    if (k) EXPECT_LE(s[k - 1], s[k]);
    EXPECT_NEAR(s[k] * s[k], ev[k], 1e-10);
  }
}

TEST(EmpiricalSpectrum, ScalarCase) {
  const auto spectra = empirical_spectrum(ones(1, 1), {EntryFamily::rademacher, 0, false}, std::nullopt, 1, 9);
  ASSERT_EQ(spectra.size(), 1u);
  EXPECT_EQ(spectra[0].atoms(), std::vector<double>{1.0});
}

TEST(EmpiricalSpectrum, DeterministicAndScheduleIndependent) {
  const WeightProfile p = WeightProfile::validate(oracle::uniform_profile(20, 25, 0.0, 2.0, 3));
  const EntrySampler s{EntryFamily::gaussian, 0, false};
  const auto a = empirical_spectrum(p, s, TruncationPipelineConfig{0.5, true, true}, 4, 77, 1);
  const auto b = empirical_spectrum(p, s, TruncationPipelineConfig{0.5, true, true}, 4, 77, 3);
  for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(a[t].atoms(), b[t].atoms());
  EXPECT_NE(a[0].atoms(), a[1].atoms());
  EXPECT_NE(derive_seed(77, 0), derive_seed(77, 1));
  EXPECT_NE(derive_seed(77, 0), derive_seed(78, 0));
}

TEST(EmpiricalSpectrum, MarchenkoPasturEdge) {
  const auto spectra = empirical_spectrum(ones(256, 256), {EntryFamily::rademacher, 0, false}, std::nullopt, 5, 1);
  for (const auto& F : spectra) {
    EXPECT_GT(F.atoms().back(), 3.6);
    EXPECT_LT(F.atoms().back(), 4.6);
  }
}

TEST(PerturbationBounds, TruncatedRowsBoundKolmogorovDistance) {
  const WeightProfile p = WeightProfile::validate(oracle::uniform_profile(64, 80, 0.0, 2.0, 1));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const EntrySampler s{EntryFamily::gaussian, seed, false};
    const Eigen::MatrixXcd X = sample_matrix(64, 80, s);
    const PipelineResult cut = truncate_center_rescale(X, {0.3, false, false}, EntryLaw::of(s));
    ASSERT_GT(cut.truncated_rows.size(), 0u);
    const EmpiricalDistribution F(hermitian_eigenvalues(build_B(p, X)));
    const EmpiricalDistribution G(hermitian_eigenvalues(build_B(p, cut.X)));
    EXPECT_LE(ks_distance(F, G), double(cut.truncated_rows.size()) / 64.0 + 1e-12);
    EXPECT_NEAR(ks_distance(F, G), oracle::ks_sorted(F.atoms(), G.atoms()), 1e-15);
  }
}

TEST(PerturbationBounds, SingularValueChain) {
  const WeightProfile p = WeightProfile::validate(oracle::uniform_profile(48, 60, 0.0, 2.0, 2));
  const double rootN = std::sqrt(60.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const EntrySampler s{EntryFamily::gaussian, seed, false};
    const Eigen::MatrixXcd X = sample_matrix(48, 60, s);
    const PipelineResult tilde = truncate_center_rescale(X, {0.3, false, false}, EntryLaw::of(s));
    const PipelineResult hat = truncate_center_rescale(X, {0.3, true, true}, EntryLaw::of(s));
    const Eigen::MatrixXcd centred = (tilde.X.array() - hat.moments.mean).matrix();
    const Eigen::MatrixXcd A = hat.X.cwiseProduct(p.entries().cast<cplx>()) / rootN;
    const Eigen::MatrixXcd B = centred.cwiseProduct(p.entries().cast<cplx>()) / rootN;
    const auto sa = singular_values(A), sb = singular_values(B);
    double lhs = 0.0;
    for (std::size_t k = 0; k < sa.size(); ++k) lhs += (sa[k] - sb[k]) * (sa[k] - sb[k]);
    EXPECT_LE(lhs, (A - B).squaredNorm() + 1e-12);

    std::vector<double> x(sa.size()), y(sb.size());
    for (std::size_t k = 0; k < sa.size(); ++k) {
      x[k] = sa[k] * sa[k];
      y[k] = sb[k] * sb[k];
    }
    const double d = d_metric(EmpiricalDistribution(x), EmpiricalDistribution(y), 20).value;
    const double mad = mean_abs_deviation(x, y);
    EXPECT_LE(d, mad + 1e-12);
    EXPECT_LE(mad, wasserstein_sq_bound(x, y) + 1e-12);
  }
}
