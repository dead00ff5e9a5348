#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace hs {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Nonnegative n x N weight matrix D. Every column carries at least one
/// strictly positive entry. Immutable once validated.
class WeightProfile {
 public:
  /// Validates and takes ownership of `entries`. Checks run in the order
  /// EmptyMatrix, NonFiniteEntry, NegativeEntry, ZeroColumn; the first
  /// violation found in row-major order is reported.
  static WeightProfile validate(Eigen::MatrixXd entries);
  static WeightProfile validate(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(d_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(d_.cols()); }

  /// c = n / N as a double.
  double ratio() const noexcept { return static_cast<double>(rows()) / static_cast<double>(cols()); }
  /// c = n / N as a reduced fraction (numerator, denominator).
  std::pair<std::size_t, std::size_t> ratio_fraction() const noexcept;

  double max_entry() const noexcept { return max_entry_; }
  double operator()(std::size_t i, std::size_t j) const {
    return d_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  const Eigen::MatrixXd& entries() const noexcept { return d_; }
  /// Entrywise squares d_ij^2.
  const Eigen::MatrixXd& squared() const noexcept { return d2_; }

  /// (1/n) sum_i d_ij^2, the total mass carried by e_j.
  double column_mass(std::size_t j) const;
  /// Entrywise scaling s * D (s > 0).
  WeightProfile scaled(double s) const;

 private:
  explicit WeightProfile(Eigen::MatrixXd entries);

  Eigen::MatrixXd d_;
  Eigen::MatrixXd d2_;
  double max_entry_ = 0.0;
};

/// z = x + i v with v > 0.
class SpectralPoint {
 public:
  SpectralPoint(double x, double v);

  double x() const noexcept { return x_; }
  double v() const noexcept { return v_; }
  cplx z() const noexcept { return {x_, v_}; }

  friend bool operator==(const SpectralPoint&, const SpectralPoint&) = default;

 private:
  double x_;
  double v_;
};

/// Ordered, nonempty set of evaluation points.
class ZGrid {
 public:
  explicit ZGrid(std::vector<SpectralPoint> points);

  /// Sorts by ascending x, descending v within equal x.
  static ZGrid continuation_order(std::vector<SpectralPoint> points);
  /// `count` equispaced points x in [xmin, xmax] at height v.
  static ZGrid horizontal(double xmin, double xmax, std::size_t count, double v);

  const std::vector<SpectralPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const SpectralPoint& operator[](std::size_t k) const { return points_[k]; }

 private:
  std::vector<SpectralPoint> points_;
};

struct FixedPointSolution {
  SpectralPoint z{0.0, 1.0};
  CVector e0;                    // length N
  cplx g{0.0, 0.0};              // G_n(z)
  double residual = 0.0;         // sup |e - T(e)|
  double rho_C0 = 0.0;           // spectral radius of C0, NaN when not certified
  double identity_defect = 0.0;  // sup |e2 - C0 e2 - v b0|, NaN when not certified
  std::size_t iterations = 0;
  std::size_t newton_steps = 0;
  std::size_t rejected_steps = 0;
  bool converged = false;
  bool certified = false;
  bool power_stalled = false;
};

/// Equal-mass atoms, sorted ascending; right-continuous step CDF.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(std::vector<double> atoms);

  const std::vector<double>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double mass_per_atom() const noexcept { return atoms_.empty() ? 0.0 : 1.0 / static_cast<double>(atoms_.size()); }

  /// F(x) = #{atoms <= x} / size.
  double cdf(double x) const;
  /// F(x-) = #{atoms < x} / size.
  double cdf_left(double x) const;

 private:
  std::vector<double> atoms_;
};

/// Deterministic-equivalent distribution recovered on a grid: continuous
/// density plus an optional point mass at zero.
struct DensityCurve {
  std::vector<double> xs;
  std::vector<double> density;   // NaN at gap points
  std::vector<double> cdf;       // includes the atom for x >= 0
  std::vector<double> eta_used;  // 0 marks an extrapolated (eta -> 0+) value
  double atom_at_zero = 0.0;
  std::size_t gap_count = 0;
  bool partial = false;
  double residual_max = 0.0;
  double rho_max = 0.0;          // over certified points, NaN when none

  double total_mass() const { return cdf.empty() ? 0.0 : cdf.back(); }
  /// Linear interpolation of the continuous part plus the atom step at 0.
  double cdf_at(double x) const;
  /// Left limit of cdf_at.
  double cdf_left_at(double x) const;
  /// Linear interpolation of the density, 0 outside the grid.
  double density_at(double x) const;
  /// Maximal runs of grid points where density > threshold, as [lo, hi].
  std::vector<std::pair<double, double>> support(double threshold = 1e-4) const;
};

}  // namespace hs
