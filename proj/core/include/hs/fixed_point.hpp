#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hs/core.hpp"

namespace hs {

struct SolverConfig {
  double tol = 1e-12;             // sup-norm fixed-point residual target
  std::size_t max_iter = 10000;   // damped sweeps plus Newton steps
  double damping = 1.0;           // initial relaxation weight alpha in (0, 1]
  bool continuation = true;       // warm-start grid sweeps from solved neighbours
  bool newton = true;             // Newton refinement once inside the contraction basin
  double newton_switch = 1e-2;    // relative residual below which Newton may engage
  bool certify = true;            // attach rho(C0) and the imaginary-part identity defect

  void validate() const;
};

/// Perron root of a nonnegative square matrix by power iteration.
struct PerronEstimate {
  double rho = 0.0;
  double rho_upper = 0.0;   // Collatz-Wielandt bound max_i (Mx)_i / x_i of the final iterate
  std::size_t iterations = 0;
  bool stalled = false;     // relative change still > 1e-10 at the cap
};

PerronEstimate perron_radius(const Eigen::MatrixXd& m, const Eigen::VectorXd& start,
                             double tol = 1e-12, std::size_t cap = 50000);

/// Certificate quantities at a solution: e2 = C0 e2 + v b0 with rho(C0) < 1.
struct ContractionDiagnostics {
  Eigen::MatrixXd C0;      // N x N, nonnegative
  Eigen::VectorXd b0;      // N, positive
  Eigen::VectorXd e2;      // N, Im e0
  double rho = 0.0;
  double rho_upper = 0.0;
  double identity_defect = 0.0;
  std::size_t power_iterations = 0;
  bool power_stalled = false;
};

/// Inner denominators (1/N) sum_k d_ik^2 / (1 + (n/N) e_k) - z, one per row.
/// Requires Im e_k > 0 for every k.
CVector row_denominators(const WeightProfile& profile, std::span<const cplx> e, SpectralPoint z);

/// One application of e_j -> (1/n) sum_i d_ij^2 / denom_i.
CVector iterate_e(const WeightProfile& profile, std::span<const cplx> e, SpectralPoint z);

/// The N x N matrix linking two solutions, e - ebar = A (e - ebar). With
/// ebar = e it is the Jacobian of `iterate_e` at e.
Eigen::MatrixXcd coupling_matrix(const WeightProfile& profile, std::span<const cplx> e,
                                 std::span<const cplx> ebar, SpectralPoint z);

/// Solver for a fixed profile. Columns (rows) of D with identical squared
/// entries share the same e_k (denominator), so the iteration runs on the
/// distinct columns and rows only and expands the result back to length N.
class FixedPointSolver {
 public:
  FixedPointSolver(const WeightProfile& profile, SolverConfig cfg);

  /// `warm_start`, when nonempty, must have length N and Im > 0 throughout.
  FixedPointSolution solve(SpectralPoint z, std::span<const cplx> warm_start = {}) const;

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return N_; }
  std::size_t row_classes() const noexcept { return row_mult_.size(); }
  std::size_t column_classes() const noexcept { return col_mult_.size(); }
  const SolverConfig& config() const noexcept { return cfg_; }

 private:
  struct Evaluation {
    Eigen::VectorXcd image;   // T(e) on column classes
    Eigen::VectorXcd denom;   // per row class
    double residual = 0.0;
  };

  Evaluation evaluate(const Eigen::VectorXcd& e, cplx z) const;
  Eigen::MatrixXcd jacobian(const Eigen::VectorXcd& e, const Eigen::VectorXcd& denom) const;
  void certify(FixedPointSolution& sol, const Eigen::VectorXcd& e, const Eigen::VectorXcd& denom) const;

  SolverConfig cfg_;
  std::size_t n_ = 0;
  std::size_t N_ = 0;
  double c_ = 1.0;
  Eigen::MatrixXd w2_;              // row classes x column classes of d^2
  Eigen::VectorXd row_mult_;
  Eigen::VectorXd col_mult_;
  Eigen::VectorXd col_mass_;        // (1/n) sum_i d_ik^2 per column class
  std::vector<std::size_t> col_class_;   // length N
  std::vector<std::size_t> col_rep_;     // representative column per class
};

FixedPointSolution solve_e0(const WeightProfile& profile, SpectralPoint z, const SolverConfig& cfg,
                            std::span<const cplx> warm_start = {});

/// G_n(z) = (1/n) sum_i 1 / denom_i evaluated at the solution's e0.
cplx evaluate_G(const WeightProfile& profile, const FixedPointSolution& sol);

/// Full N x N assembly of C0 and b0 at the solution, Perron root of C0 by
/// power iteration started from b0, and the defect of e2 = C0 e2 + v b0.
ContractionDiagnostics build_certificate(const WeightProfile& profile, const FixedPointSolution& sol);

/// Solves every grid point in order; each warm-starts from the nearest point
/// already solved when continuation is on. Failed points come back with
/// converged == false.
std::vector<FixedPointSolution> solve_grid(const WeightProfile& profile, const ZGrid& grid,
                                           const SolverConfig& cfg);

}  // namespace hs
