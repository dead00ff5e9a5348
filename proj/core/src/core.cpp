#include "hs/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hs/error.hpp"

namespace hs {

WeightProfile::WeightProfile(Eigen::MatrixXd entries) : d_(std::move(entries)) {
  d2_ = d_.array().square().matrix();
  max_entry_ = d_.maxCoeff();
}

WeightProfile WeightProfile::validate(Eigen::MatrixXd entries) {
  if (entries.rows() == 0 || entries.cols() == 0) {
    throw Error(Errc::empty_matrix, "weight profile has no entries");
  }
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      if (!std::isfinite(entries(i, j))) {
        throw Error(Errc::non_finite_entry,
                    "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not finite",
                    {static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
      }
    }
  }
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      if (entries(i, j) < 0.0) {
        throw Error(Errc::negative_entry,
                    "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is negative",
                    {static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
      }
    }
  }
  for (Eigen::Index j = 0; j < entries.cols(); ++j) {
    if (entries.col(j).maxCoeff() <= 0.0) {
      throw Error(Errc::zero_column, "column " + std::to_string(j) + " is identically zero",
                  {static_cast<std::size_t>(j)});
    }
  }
  return WeightProfile(std::move(entries));
}

WeightProfile WeightProfile::validate(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(Errc::empty_matrix, "weight profile has no entries");
  }
  const std::size_t width = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw Error(Errc::ragged_matrix,
                  "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " entries, expected " + std::to_string(width),
                  {i});
    }
    for (std::size_t j = 0; j < width; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return validate(std::move(m));
}

std::pair<std::size_t, std::size_t> WeightProfile::ratio_fraction() const noexcept {
  const std::size_t g = std::gcd(rows(), cols());
  return {rows() / g, cols() / g};
}

double WeightProfile::column_mass(std::size_t j) const {
  return d2_.col(static_cast<Eigen::Index>(j)).sum() / static_cast<double>(rows());
}

WeightProfile WeightProfile::scaled(double s) const {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(Errc::invalid_argument, "profile scale must be positive and finite");
  }
  return WeightProfile(d_ * s);
}

SpectralPoint::SpectralPoint(double x, double v) : x_(x), v_(v) {
  if (!std::isfinite(x) || !std::isfinite(v)) {
    throw Error(Errc::invalid_argument, "spectral point must be finite");
  }
  if (!(v > 0.0)) {
    throw Error(Errc::invalid_argument, "spectral point must satisfy Im z > 0, got v = " + std::to_string(v));
  }
}

ZGrid::ZGrid(std::vector<SpectralPoint> points) : points_(std::move(points)) {
  if (points_.empty()) {
    throw Error(Errc::invalid_argument, "z-grid must be nonempty");
  }
}

ZGrid ZGrid::continuation_order(std::vector<SpectralPoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const SpectralPoint& a, const SpectralPoint& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    return a.v() > b.v();
  });
  return ZGrid(std::move(points));
}

ZGrid ZGrid::horizontal(double xmin, double xmax, std::size_t count, double v) {
  if (count == 0) throw Error(Errc::invalid_argument, "z-grid needs at least one point");
  if (count > 1 && !(xmax > xmin)) throw Error(Errc::invalid_argument, "z-grid requires xmin < xmax");
  std::vector<SpectralPoint> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    pts.emplace_back(xmin + t * (xmax - xmin), v);
  }
  return ZGrid(std::move(pts));
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> atoms) : atoms_(std::move(atoms)) {
  for (double a : atoms_) {
    if (!std::isfinite(a)) throw Error(Errc::non_finite_entry, "empirical distribution atom is not finite");
  }
  std::sort(atoms_.begin(), atoms_.end());
}

double EmpiricalDistribution::cdf(double x) const {
  if (atoms_.empty()) return 0.0;
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
  return static_cast<double>(it - atoms_.begin()) / static_cast<double>(atoms_.size());
}

double EmpiricalDistribution::cdf_left(double x) const {
  if (atoms_.empty()) return 0.0;
  const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x);
  return static_cast<double>(it - atoms_.begin()) / static_cast<double>(atoms_.size());
}

namespace {

// Continuous part of the stored cdf at grid index k.
double continuous_cdf(const DensityCurve& c, std::size_t k) {
  return c.cdf[k] - (c.xs[k] >= 0.0 ? c.atom_at_zero : 0.0);
}

double interpolate_continuous(const DensityCurve& c, double x) {
  if (c.xs.empty()) return 0.0;
  if (x <= c.xs.front()) return x < c.xs.front() ? 0.0 : continuous_cdf(c, 0);
  if (x >= c.xs.back()) return continuous_cdf(c, c.xs.size() - 1);
  const auto it = std::upper_bound(c.xs.begin(), c.xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - c.xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - c.xs[lo]) / (c.xs[hi] - c.xs[lo]);
  return (1.0 - t) * continuous_cdf(c, lo) + t * continuous_cdf(c, hi);
}

}  // namespace

double DensityCurve::cdf_at(double x) const {
  return interpolate_continuous(*this, x) + (x >= 0.0 ? atom_at_zero : 0.0);
}

double DensityCurve::cdf_left_at(double x) const {
  return interpolate_continuous(*this, x) + (x > 0.0 ? atom_at_zero : 0.0);
}

double DensityCurve::density_at(double x) const {
  if (xs.empty() || x < xs.front() || x > xs.back()) return 0.0;
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.end()) return density.back();
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return (1.0 - t) * density[lo] + t * density[hi];
}

std::vector<std::pair<double, double>> DensityCurve::support(double threshold) const {
  std::vector<std::pair<double, double>> runs;
  bool open = false;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const bool in = std::isfinite(density[k]) && density[k] > threshold;
    if (in && !open) {
      runs.emplace_back(xs[k], xs[k]);
      open = true;
    } else if (in) {
      runs.back().second = xs[k];
    } else {
      open = false;
    }
  }
  return runs;
}

}  // namespace hs
