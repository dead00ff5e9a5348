#include "hs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "hs/error.hpp"

namespace hs {

namespace {

template <typename F, typename G>
DMetricValue d_metric_impl(const F& f_measure, const G& g_measure, std::size_t i_max) {
  if (i_max < 1) throw Error(Errc::invalid_argument, "i_max must be at least 1");
  DMetricValue out;
  for (const TestFunctionIndex& f : test_functions(i_max)) {
    const double diff = std::abs(integrate_test_function(f_measure, f) - integrate_test_function(g_measure, f));
    out.value += diff * std::ldexp(1.0, -static_cast<int>(f.index));
  }
  out.tail_bound = std::ldexp(1.0, 1 - static_cast<int>(i_max));
  return out;
}

void check_pair(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(Errc::length_mismatch, "samples must have equal length");
  if (xs.empty()) throw Error(Errc::invalid_argument, "samples must be nonempty");
  if (!std::is_sorted(xs.begin(), xs.end()) || !std::is_sorted(ys.begin(), ys.end())) {
    throw Error(Errc::invalid_argument, "samples must be ascending");
  }
}

}  // namespace

double TestFunctionIndex::operator()(double x) const noexcept {
  const double h = 1.0 / static_cast<double>(m);
  const double lo = a();
  const double hi = b();
  if (x <= lo - h || x >= hi + h) return 0.0;
  if (x < lo) return x - (lo - h);
  if (x > hi) return (hi + h) - x;
  return h;
}

std::vector<TestFunctionIndex> test_functions(std::size_t count) {
  std::vector<TestFunctionIndex> out;
  out.reserve(count);
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t>> seen;
  for (std::int64_t m = 1; out.size() < count; ++m) {
    for (std::int64_t pa = -m * m; pa <= m * m; ++pa) {
      for (std::int64_t qa = 1; qa <= m; ++qa) {
        if (std::abs(pa) > m * qa) continue;
        for (std::int64_t pb = -m * m; pb <= m * m; ++pb) {
          for (std::int64_t qb = 1; qb <= m; ++qb) {
            if (std::abs(pb) > m * qb) continue;
            if (!(pa * qb < pb * qa)) continue;
            const std::int64_t ga = std::gcd(pa, qa);
            const std::int64_t gb = std::gcd(pb, qb);
            const auto key = std::make_tuple(m, pa / ga, qa / ga, pb / gb, qb / gb);
            if (!seen.insert(key).second) continue;
            TestFunctionIndex f;
            f.m = m;
            f.a_num = pa / ga;
            f.a_den = qa / ga;
            f.b_num = pb / gb;
            f.b_den = qb / gb;
            f.index = out.size() + 1;
            out.push_back(f);
            if (out.size() == count) return out;
          }
        }
      }
    }
  }
  return out;
}

double integrate_test_function(const EmpiricalDistribution& F, const TestFunctionIndex& f) {
  double sum = 0.0;
  for (double x : F.atoms()) sum += f(x);
  return sum * F.mass_per_atom();
}

double integrate_test_function(const DensityCurve& F, const TestFunctionIndex& f) {
  double sum = 0.0;
  std::size_t prev = F.xs.size();
  for (std::size_t k = 0; k < F.xs.size(); ++k) {
    if (!std::isfinite(F.density[k])) continue;
    if (prev < F.xs.size()) {
      sum += 0.5 * (f(F.xs[prev]) * F.density[prev] + f(F.xs[k]) * F.density[k]) * (F.xs[k] - F.xs[prev]);
    }
    prev = k;
  }
  return sum + F.atom_at_zero * f(0.0);
}

DMetricValue d_metric(const EmpiricalDistribution& F, const EmpiricalDistribution& G, std::size_t i_max) {
  return d_metric_impl(F, G, i_max);
}
DMetricValue d_metric(const EmpiricalDistribution& F, const DensityCurve& G, std::size_t i_max) {
  return d_metric_impl(F, G, i_max);
}
DMetricValue d_metric(const DensityCurve& F, const EmpiricalDistribution& G, std::size_t i_max) {
  return d_metric_impl(F, G, i_max);
}
DMetricValue d_metric(const DensityCurve& F, const DensityCurve& G, std::size_t i_max) {
  return d_metric_impl(F, G, i_max);
}

double ks_distance(const EmpiricalDistribution& F, const EmpiricalDistribution& G) {
  double best = 0.0;
  auto probe = [&](double x) {
    best = std::max(best, std::abs(F.cdf(x) - G.cdf(x)));
    best = std::max(best, std::abs(F.cdf_left(x) - G.cdf_left(x)));
  };
  for (double x : F.atoms()) probe(x);
  for (double x : G.atoms()) probe(x);
  return best;
}

double ks_distance(const EmpiricalDistribution& F, const DensityCurve& G) {
  double best = 0.0;
  auto probe = [&](double x) {
    best = std::max(best, std::abs(F.cdf(x) - G.cdf_at(x)));
    best = std::max(best, std::abs(F.cdf_left(x) - G.cdf_left_at(x)));
  };
  for (double x : F.atoms()) probe(x);
  for (double x : G.xs) probe(x);
  if (G.atom_at_zero > 0.0) probe(0.0);
  return best;
}

double mean_abs_deviation(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  double sum = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) sum += std::abs(xs[j] - ys[j]);
  return sum / static_cast<double>(xs.size());
}

double wasserstein_sq_bound(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  double sum = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) sum += (xs[j] - ys[j]) * (xs[j] - ys[j]);
  return std::sqrt(sum / static_cast<double>(xs.size()));
}

}  // namespace hs
