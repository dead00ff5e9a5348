#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hs/core.hpp"

namespace hs {

/// Test function f_i: value 1/m on [a, b], zero outside
/// (a - 1/m, b + 1/m), linear in between. a = a_num / a_den, b = b_num / b_den
/// in lowest terms; `index` is the 1-based position in the enumeration.
///
/// Enumeration order: m = 1, 2, ...; within m, tuples (a_num, a_den, b_num,
/// b_den) with 1 <= den <= m and |num| <= m * den in lexicographic order,
/// keeping a < b and skipping triples (m, a, b) already listed.
struct TestFunctionIndex {
  std::int64_t m = 1;
  std::int64_t a_num = 0;
  std::int64_t a_den = 1;
  std::int64_t b_num = 1;
  std::int64_t b_den = 1;
  std::size_t index = 1;

  double a() const noexcept { return static_cast<double>(a_num) / static_cast<double>(a_den); }
  double b() const noexcept { return static_cast<double>(b_num) / static_cast<double>(b_den); }
  double operator()(double x) const noexcept;
};

/// The first `count` test functions in enumeration order.
std::vector<TestFunctionIndex> test_functions(std::size_t count);

double integrate_test_function(const EmpiricalDistribution& F, const TestFunctionIndex& f);
/// Trapezoid rule on the grid plus the atom at zero.
double integrate_test_function(const DensityCurve& F, const TestFunctionIndex& f);

struct DMetricValue {
  double value = 0.0;       // sum_{i <= i_max} |int f_i dF - int f_i dG| 2^-i
  double tail_bound = 0.0;  // 2^(1 - i_max); the full sum lies in [value, value + tail_bound]
};

DMetricValue d_metric(const EmpiricalDistribution& F, const EmpiricalDistribution& G, std::size_t i_max = 24);
DMetricValue d_metric(const EmpiricalDistribution& F, const DensityCurve& G, std::size_t i_max = 24);
DMetricValue d_metric(const DensityCurve& F, const EmpiricalDistribution& G, std::size_t i_max = 24);
DMetricValue d_metric(const DensityCurve& F, const DensityCurve& G, std::size_t i_max = 24);

/// sup_x |F(x) - G(x)|, evaluated on both sides of every atom and at every grid point.
double ks_distance(const EmpiricalDistribution& F, const EmpiricalDistribution& G);
double ks_distance(const EmpiricalDistribution& F, const DensityCurve& G);

/// (1/n) sum |x_j - y_j| for ascending samples of equal length.
double mean_abs_deviation(std::span<const double> xs, std::span<const double> ys);
/// ((1/n) sum (x_j - y_j)^2)^(1/2) for ascending samples of equal length; an
/// upper bound on D between the two empirical distributions.
double wasserstein_sq_bound(std::span<const double> xs, std::span<const double> ys);

}  // namespace hs
