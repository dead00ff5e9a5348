#pragma once

#include <cstddef>
#include <vector>

#include "hs/core.hpp"
#include "hs/fixed_point.hpp"

namespace hs {

enum class Extrapolation { last_value, richardson };

struct InversionConfig {
  std::vector<double> eta_sequence{1e-2, 5e-3, 2.5e-3};
  std::vector<double> x_grid;
  Extrapolation extrapolation = Extrapolation::richardson;
  // Two-point estimates from the smallest and the next pair of heights that
  // disagree by more than this fraction of the larger of the estimate and the
  // raw smallest-height value mark the point as near an edge; the raw value is
  // used there instead.
  double edge_tolerance = 0.1;
  bool detect_atom = true;
  std::size_t certify_stride = 1;   // certify every k-th grid point, 0 disables
  unsigned threads = 1;

  void validate() const;

  /// `count` equispaced points on [xmin, xmax].
  static std::vector<double> uniform_grid(double xmin, double xmax, std::size_t count);
  /// Point count giving spacing at most half the smallest height.
  static std::size_t resolving_point_count(double xmin, double xmax, double eta_min);
};

/// Point mass of F0_n at zero, read off eta * Im G_n(i eta) as eta -> 0+.
double atom_mass_at_zero(const WeightProfile& profile, const SolverConfig& solver_cfg);

/// Density (1/pi) lim Im G_n(x + i eta) on the grid, with eta -> 0+ taken by
/// two-point extrapolation, clamped at zero; cdf by the trapezoid rule plus
/// the detected atom at zero. Unconverged points become gaps.
DensityCurve density_curve(const WeightProfile& profile, const InversionConfig& cfg, const SolverConfig& solver_cfg);

/// (1/pi) int_a^b Im G_n(xi + i eta) d xi by adaptive Gauss-Kronrod.
/// Throws QuadratureStall when the error estimate stays above `quad_tol`.
double cdf_interval(const WeightProfile& profile, double a, double b, double eta, const SolverConfig& solver_cfg,
                    double quad_tol = 1e-6);

struct MassReport {
  std::vector<double> heights;      // v for z = i v
  std::vector<double> g_defects;    // |z G + 1|
  std::vector<double> e_defects;    // max_j |z e_j + (1/n) sum_i d_ij^2|
  double max_column_mass = 0.0;
  double max_g_defect = 0.0;
  double max_e_defect = 0.0;
};

/// Large-|z| behaviour at z = i 10^k, k = 2..6.
MassReport mass_check(const WeightProfile& profile, const SolverConfig& solver_cfg);

}  // namespace hs
