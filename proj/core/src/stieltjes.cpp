#include "hs/stieltjes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hs/error.hpp"
#include "hs/parallel.hpp"

namespace hs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Density scale, relative to 1 / mean d^2, below which edge disagreement is ignored.
constexpr double kEdgeFloor = 1e-3;

struct Sweep {
  std::vector<double> im_g;      // Im G / pi, NaN where unconverged
  std::vector<double> residual;
  std::vector<double> rho;       // NaN where not certified
};

Sweep sweep_horizontal(const FixedPointSolver& plain, const FixedPointSolver& certifying,
                       const std::vector<double>& xs, double eta, std::size_t stride, bool continuation) {
  Sweep s;
  s.im_g.assign(xs.size(), kNaN);
  s.residual.assign(xs.size(), kNaN);
  s.rho.assign(xs.size(), kNaN);
  CVector warm;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const bool certify = stride > 0 && (k % stride == 0 || k + 1 == xs.size());
    const FixedPointSolver& solver = certify ? certifying : plain;
    FixedPointSolution sol = solver.solve(SpectralPoint(xs[k], eta), continuation ? std::span<const cplx>(warm)
                                                                                   : std::span<const cplx>());
    s.residual[k] = sol.residual;
    if (sol.converged) {
      s.im_g[k] = sol.g.imag() / std::numbers::pi;
      if (certify) s.rho[k] = sol.rho_C0;
      warm = std::move(sol.e0);
    } else {
      warm.clear();
    }
  }
  return s;
}

}  // namespace

void InversionConfig::validate() const {
  if (eta_sequence.empty()) throw Error(Errc::invalid_argument, "eta sequence must be nonempty");
  for (double eta : eta_sequence) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(Errc::invalid_argument, "every eta must be positive");
  }
  for (std::size_t k = 1; k < eta_sequence.size(); ++k) {
    if (!(eta_sequence[k] < eta_sequence[k - 1])) {
      throw Error(Errc::invalid_argument, "eta sequence must be strictly descending");
    }
  }
  if (x_grid.size() < 2) throw Error(Errc::invalid_argument, "x grid needs at least two points");
  for (std::size_t k = 1; k < x_grid.size(); ++k) {
    if (!(x_grid[k] > x_grid[k - 1])) throw Error(Errc::invalid_argument, "x grid must be strictly ascending");
  }
  if (!(edge_tolerance > 0.0)) throw Error(Errc::invalid_argument, "edge tolerance must be positive");
}

std::vector<double> InversionConfig::uniform_grid(double xmin, double xmax, std::size_t count) {
  if (count < 2 || !(xmax > xmin)) throw Error(Errc::invalid_argument, "uniform grid needs xmin < xmax and two points");
  std::vector<double> xs(count);
  const double h = (xmax - xmin) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) xs[k] = xmin + h * static_cast<double>(k);
  xs.back() = xmax;
  return xs;
}

std::size_t InversionConfig::resolving_point_count(double xmin, double xmax, double eta_min) {
  return static_cast<std::size_t>(std::ceil((xmax - xmin) / (0.5 * eta_min))) + 1;
}

double atom_mass_at_zero(const WeightProfile& profile, const SolverConfig& solver_cfg) {
  SolverConfig cfg = solver_cfg;
  cfg.certify = false;
  const FixedPointSolver solver(profile, cfg);
  CVector warm;
  double a_prev = kNaN;
  double a_last = kNaN;
  double eta_prev = kNaN;
  double eta_last = kNaN;
  for (int k = 0; k <= 8; ++k) {
    const double eta = std::pow(10.0, -k);
    FixedPointSolution sol = solver.solve(SpectralPoint(0.0, eta), warm);
    if (!sol.converged) {
      throw Error(Errc::convergence_failure, "solver did not converge at z = i*" + std::to_string(eta));
    }
    a_prev = a_last;
    eta_prev = eta_last;
    a_last = eta * sol.g.imag();
    eta_last = eta;
    warm = std::move(sol.e0);
  }
  // Remainder behaves like sqrt(eta) at a hard edge and like eta in a gap;
  // extrapolating in sqrt(eta) removes the former and is harmless for the latter.
  const double s1 = std::sqrt(eta_prev);
  const double s2 = std::sqrt(eta_last);
  double atom = (a_last * s1 - a_prev * s2) / (s1 - s2);
  atom = std::clamp(atom, 0.0, 1.0);
  return atom < 1e-9 ? 0.0 : atom;
}

DensityCurve density_curve(const WeightProfile& profile, const InversionConfig& cfg, const SolverConfig& solver_cfg) {
  cfg.validate();
  solver_cfg.validate();
  SolverConfig plain_cfg = solver_cfg;
  plain_cfg.certify = false;
  SolverConfig cert_cfg = solver_cfg;
  cert_cfg.certify = true;
  const FixedPointSolver plain(profile, plain_cfg);
  const FixedPointSolver certifying(profile, cert_cfg);

  DensityCurve curve;
  curve.xs = cfg.x_grid;
  curve.atom_at_zero = cfg.detect_atom ? atom_mass_at_zero(profile, solver_cfg) : 0.0;

  const std::vector<double>& etas = cfg.eta_sequence;
  std::vector<Sweep> sweeps(etas.size());
  parallel_for(etas.size(), cfg.threads, [&](std::size_t h) {
    sweeps[h] = sweep_horizontal(plain, certifying, curve.xs, etas[h], cfg.certify_stride, solver_cfg.continuation);
  });

  const std::size_t P = curve.xs.size();
  const std::size_t H = etas.size();
  curve.density.assign(P, kNaN);
  curve.eta_used.assign(P, kNaN);
  curve.residual_max = 0.0;
  curve.rho_max = kNaN;
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t k = 0; k < P; ++k) {
      if (std::isfinite(sweeps[h].residual[k])) curve.residual_max = std::max(curve.residual_max, sweeps[h].residual[k]);
      if (std::isfinite(sweeps[h].rho[k])) {
        curve.rho_max = std::isfinite(curve.rho_max) ? std::max(curve.rho_max, sweeps[h].rho[k]) : sweeps[h].rho[k];
      }
    }
  }

  // Continuous part at height eta: the atom's Lorentzian is removed first.
  auto continuous = [&](std::size_t h, std::size_t k) {
    const double eta = etas[h];
    const double x = curve.xs[k];
    return sweeps[h].im_g[k] - curve.atom_at_zero * eta / (std::numbers::pi * (x * x + eta * eta));
  };
  auto two_point = [&](std::size_t big, std::size_t small, std::size_t k) {
    const double ea = etas[big];
    const double eb = etas[small];
    return (ea * continuous(small, k) - eb * continuous(big, k)) / (ea - eb);
  };

  const double edge_floor = kEdgeFloor / profile.squared().mean();
  for (std::size_t k = 0; k < P; ++k) {
    bool ok = true;
    for (std::size_t h = 0; h < H; ++h) ok = ok && std::isfinite(sweeps[h].im_g[k]);
    if (!ok) {
      ++curve.gap_count;
      continue;
    }
    const std::size_t smallest = H - 1;
    double value = continuous(smallest, k);
    double eta_used = etas[smallest];
    if (cfg.extrapolation == Extrapolation::richardson && H >= 2) {
      const double r = two_point(H - 2, H - 1, k);
      bool edge = false;
      if (H >= 3) {
        const double r_coarse = two_point(H - 3, H - 2, k);
        edge = std::abs(r - r_coarse) > cfg.edge_tolerance * std::max({std::abs(r), std::abs(value), edge_floor});
      }
      if (!edge) {
        value = r;
        eta_used = 0.0;
      }
    }
    curve.density[k] = std::max(0.0, value);
    curve.eta_used[k] = eta_used;
  }
  curve.partial = curve.gap_count > 0;

  // Trapezoid cumulative mass; gaps are bridged by their valid neighbours.
  curve.cdf.assign(P, 0.0);
  double mass = 0.0;
  std::size_t last_valid = P;
  for (std::size_t k = 0; k < P; ++k) {
    if (std::isfinite(curve.density[k])) {
      if (last_valid < P) {
        mass += 0.5 * (curve.density[last_valid] + curve.density[k]) * (curve.xs[k] - curve.xs[last_valid]);
      }
      last_valid = k;
    }
    curve.cdf[k] = mass + (curve.xs[k] >= 0.0 ? curve.atom_at_zero : 0.0);
  }
  return curve;
}

double cdf_interval(const WeightProfile& profile, double a, double b, double eta, const SolverConfig& solver_cfg,
                    double quad_tol) {
  if (!(eta > 0.0)) throw Error(Errc::invalid_argument, "eta must be positive");
  if (a > b) throw Error(Errc::invalid_argument, "cdf_interval requires a <= b");
  if (a == b) return 0.0;
  SolverConfig cfg = solver_cfg;
  cfg.certify = false;
  const FixedPointSolver solver(profile, cfg);
  CVector warm;
  bool failed = false;
  auto integrand = [&](double xi) {
    FixedPointSolution sol = solver.solve(SpectralPoint(xi, eta), warm);
    if (!sol.converged) {
      failed = true;
      warm.clear();
      return 0.0;
    }
    warm = std::move(sol.e0);
    return sol.g.imag() / std::numbers::pi;
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, a, b, 15, quad_tol, &error);
  if (failed) {
    throw Error(Errc::quadrature_stall, "fixed-point solver failed at a quadrature node");
  }
  if (!(error <= quad_tol)) {
    throw Error(Errc::quadrature_stall, "error estimate " + std::to_string(error) + " above tolerance");
  }
  return value;
}

MassReport mass_check(const WeightProfile& profile, const SolverConfig& solver_cfg) {
  SolverConfig cfg = solver_cfg;
  cfg.certify = false;
  const FixedPointSolver solver(profile, cfg);
  MassReport report;
  std::vector<double> masses(profile.cols());
  for (std::size_t j = 0; j < profile.cols(); ++j) {
    masses[j] = profile.column_mass(j);
    report.max_column_mass = std::max(report.max_column_mass, masses[j]);
  }
  for (int k = 2; k <= 6; ++k) {
    const double v = std::pow(10.0, k);
    const FixedPointSolution sol = solver.solve(SpectralPoint(0.0, v));
    const cplx z(0.0, v);
    const double gd = std::abs(z * sol.g + 1.0);
    double ed = 0.0;
    for (std::size_t j = 0; j < profile.cols(); ++j) ed = std::max(ed, std::abs(z * sol.e0[j] + masses[j]));
    report.heights.push_back(v);
    report.g_defects.push_back(gd);
    report.e_defects.push_back(ed);
    report.max_g_defect = std::max(report.max_g_defect, gd);
    report.max_e_defect = std::max(report.max_e_defect, ed);
  }
  return report;
}

}  // namespace hs
