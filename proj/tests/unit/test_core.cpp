#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hs/core.hpp"
#include "hs/error.hpp"

using namespace hs;

namespace {

template <typename F>
Error capture(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected hs::Error";
  return Error(Errc::invalid_argument, "none");
}

}  // namespace

TEST(WeightProfile, AllOnesIsValid) {
  const WeightProfile p = WeightProfile::validate(Eigen::MatrixXd::Ones(2, 2));
  EXPECT_EQ(p.rows(), 2u);
  EXPECT_EQ(p.cols(), 2u);
  EXPECT_EQ(p.max_entry(), 1.0);
}

TEST(WeightProfile, ZeroColumnIsRejectedWithItsIndex) {
  Eigen::MatrixXd d(2, 2);
  d << 1, 0, 1, 0;
  const Error e = capture([&] { WeightProfile::validate(d); });
  EXPECT_EQ(e.code(), Errc::zero_column);
  EXPECT_EQ(e.indices(), std::vector<std::size_t>{1});
}

TEST(WeightProfile, NegativeEntryIsRejectedWithItsPosition) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(2, 2);
  d(0, 0) = -0.5;
  const Error e = capture([&] { WeightProfile::validate(d); });
  EXPECT_EQ(e.code(), Errc::negative_entry);
  EXPECT_EQ(e.indices(), (std::vector<std::size_t>{0, 0}));
}

TEST(WeightProfile, EmptyRaggedAndNonFiniteInputs) {
  EXPECT_EQ(capture([] { WeightProfile::validate(Eigen::MatrixXd(0, 3)); }).code(), Errc::empty_matrix);
  EXPECT_EQ(capture([] { WeightProfile::validate(std::vector<std::vector<double>>{}); }).code(), Errc::empty_matrix);
  EXPECT_EQ(capture([] { WeightProfile::validate(std::vector<std::vector<double>>{{1.0, 2.0}, {1.0}}); }).code(), Errc::ragged_matrix);
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(2, 2);
  d(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(capture([&] { WeightProfile::validate(d); }).code(), Errc::non_finite_entry);
}

TEST(WeightProfile, FirstViolationFollowsCheckOrder) {
  // A negative entry and a zero column: the negative entry is reported.
  Eigen::MatrixXd d(2, 3);
  d << 0, 1, -1, 0, 1, 2;
  EXPECT_EQ(capture([&] { WeightProfile::validate(d); }).code(), Errc::negative_entry);
}

TEST(WeightProfile, RatioIsExactFraction) {
  const WeightProfile p = WeightProfile::validate(Eigen::MatrixXd::Ones(6, 4));
  EXPECT_EQ(p.ratio_fraction(), (std::pair<std::size_t, std::size_t>{3, 2}));
  EXPECT_EQ(p.ratio(), 1.5);
}

TEST(WeightProfile, ColumnMassAndScaling) {
  Eigen::MatrixXd d(2, 2);
  d << 1, 2, 3, 0;
  const WeightProfile p = WeightProfile::validate(d);
  EXPECT_DOUBLE_EQ(p.column_mass(0), 5.0);
  EXPECT_DOUBLE_EQ(p.column_mass(1), 2.0);
  EXPECT_DOUBLE_EQ(p.scaled(2.0).column_mass(0), 20.0);
  EXPECT_THROW(p.scaled(0.0), Error);
}

TEST(SpectralPoint, RequiresPositiveImaginaryPart) {
  EXPECT_NO_THROW(SpectralPoint(0.0, 1e-300));
  EXPECT_THROW(SpectralPoint(0.0, 0.0), Error);
  EXPECT_THROW(SpectralPoint(0.0, -1.0), Error);
  EXPECT_THROW(SpectralPoint(std::numeric_limits<double>::infinity(), 1.0), Error);
  EXPECT_EQ(SpectralPoint(2.0, 3.0).z(), cplx(2.0, 3.0));
}

TEST(ZGrid, ContinuationOrderSortsXThenDescendingV) {
  const ZGrid g = ZGrid::continuation_order({{1.0, 0.1}, {0.0, 0.5}, {1.0, 2.0}, {0.0, 1.0}});
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0], SpectralPoint(0.0, 1.0));
  EXPECT_EQ(g[1], SpectralPoint(0.0, 0.5));
  EXPECT_EQ(g[2], SpectralPoint(1.0, 2.0));
  EXPECT_EQ(g[3], SpectralPoint(1.0, 0.1));
  EXPECT_THROW(ZGrid({}), Error);
}

TEST(ZGrid, HorizontalEndpointsAreExact) {
  const ZGrid g = ZGrid::horizontal(-1.0, 5.0, 25, 0.1);
  EXPECT_EQ(g.size(), 25u);
  EXPECT_EQ(g[0].x(), -1.0);
  EXPECT_EQ(g[24].x(), 5.0);
  EXPECT_EQ(g[12].x(), 2.0);
}

TEST(EmpiricalDistribution, StepCdfIsRightContinuous) {
  const EmpiricalDistribution F({3.0, 1.0, 2.0, 2.0});
  EXPECT_EQ(F.atoms(), (std::vector<double>{1.0, 2.0, 2.0, 3.0}));
  EXPECT_EQ(F.cdf(0.5), 0.0);
  EXPECT_EQ(F.cdf(2.0), 0.75);
  EXPECT_EQ(F.cdf_left(2.0), 0.25);
  EXPECT_EQ(F.cdf(3.0), 1.0);
}

TEST(DensityCurve, AtomStepAndInterpolation) {
  DensityCurve c;
  c.xs = {-1.0, 0.0, 1.0, 2.0};
  c.density = {0.0, 0.25, 0.25, 0.0};
  c.atom_at_zero = 0.5;
  c.cdf = {0.0, 0.125 + 0.5, 0.375 + 0.5, 0.5 + 0.5};
  EXPECT_DOUBLE_EQ(c.cdf_at(0.0), 0.625);
  EXPECT_DOUBLE_EQ(c.cdf_left_at(0.0), 0.125);
  EXPECT_DOUBLE_EQ(c.cdf_at(0.5), 0.75);
  EXPECT_DOUBLE_EQ(c.cdf_at(5.0), 1.0);
  EXPECT_DOUBLE_EQ(c.cdf_at(-5.0), 0.0);
  EXPECT_DOUBLE_EQ(c.density_at(1.5), 0.125);
  EXPECT_DOUBLE_EQ(c.total_mass(), 1.0);
  const auto s = c.support(0.1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], (std::pair<double, double>{0.0, 1.0}));
}

TEST(Errors, NamesAreStable) {
  EXPECT_EQ(errc_name(Errc::zero_column), "ZeroColumn");
  EXPECT_EQ(errc_name(Errc::negative_entry), "NegativeEntry");
  const Error e(Errc::quadrature_stall, "stuck");
  EXPECT_NE(std::string(e.what()).find("QuadratureStall"), std::string::npos);
}
