#include "hs/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>

#include <Eigen/LU>

#include "hs/error.hpp"

namespace hs {

namespace {

constexpr double kMinDamping = 1.0 / 64.0;
constexpr std::size_t kDampingResetStreak = 10;
constexpr std::size_t kNewtonCooldown = 25;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_upper_half(std::span<const cplx> e) {
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (!(e[k].imag() > 0.0) || !std::isfinite(e[k].real()) || !std::isfinite(e[k].imag())) {
      throw Error(Errc::nonpositive_imaginary_input,
                  "Im e_" + std::to_string(k) + " must be positive and finite", {k});
    }
  }
}

void require_length(std::span<const cplx> e, std::size_t N) {
  if (e.size() != N) {
    throw Error(Errc::length_mismatch,
                "expected " + std::to_string(N) + " components, got " + std::to_string(e.size()));
  }
}

std::uint64_t hash_doubles(const double* data, Eigen::Index count, Eigen::Index stride) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index k = 0; k < count; ++k) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, data + k * stride, sizeof(bits));
    h ^= bits;
    h *= 1099511628211ULL;
  }
  return h;
}

// Groups identical columns of `m`; returns the class of every column and the
// representative (first) column of every class.
void group_columns(const Eigen::MatrixXd& m, std::vector<std::size_t>& cls, std::vector<std::size_t>& rep) {
  cls.assign(static_cast<std::size_t>(m.cols()), 0);
  rep.clear();
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const std::uint64_t h = hash_doubles(m.col(j).data(), m.rows(), 1);
    auto& bucket = buckets[h];
    bool found = false;
    for (std::size_t c : bucket) {
      if (m.col(static_cast<Eigen::Index>(rep[c])) == m.col(j)) {
        cls[static_cast<std::size_t>(j)] = c;
        found = true;
        break;
      }
    }
    if (!found) {
      cls[static_cast<std::size_t>(j)] = rep.size();
      bucket.push_back(rep.size());
      rep.push_back(static_cast<std::size_t>(j));
    }
  }
}

Eigen::VectorXcd mat_vec(const Eigen::MatrixXd& m, const Eigen::VectorXcd& x) {
  const Eigen::VectorXd re = m * x.real();
  const Eigen::VectorXd im = m * x.imag();
  Eigen::VectorXcd out(re.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

Eigen::VectorXcd mat_t_vec(const Eigen::MatrixXd& m, const Eigen::VectorXcd& x) {
  const Eigen::VectorXd re = m.transpose() * x.real();
  const Eigen::VectorXd im = m.transpose() * x.imag();
  Eigen::VectorXcd out(re.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

double max_abs(const Eigen::VectorXcd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool in_upper_half(const Eigen::VectorXcd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!(v(k).imag() > 0.0) || !std::isfinite(v(k).real()) || !std::isfinite(v(k).imag())) return false;
  }
  return true;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw Error(Errc::invalid_argument, "solver tol must be positive");
  if (max_iter < 1) throw Error(Errc::invalid_argument, "solver max_iter must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error(Errc::invalid_argument, "solver damping must lie in (0, 1]");
  if (!(newton_switch > 0.0)) throw Error(Errc::invalid_argument, "newton_switch must be positive");
}

PerronEstimate perron_radius(const Eigen::MatrixXd& m, const Eigen::VectorXd& start, double tol, std::size_t cap) {
  if (m.rows() != m.cols() || m.rows() != start.size()) {
    throw Error(Errc::dimension_mismatch, "power iteration needs a square matrix and a matching start vector");
  }
  PerronEstimate out;
  const double norm0 = start.cwiseAbs().sum();
  if (!(norm0 > 0.0)) throw Error(Errc::invalid_argument, "power iteration start vector is zero");
  Eigen::VectorXd x = start.cwiseAbs() / norm0;
  double lambda = 0.0;
  double change = std::numeric_limits<double>::infinity();
  std::size_t quiet = 0;
  Eigen::VectorXd y;
  for (std::size_t it = 1; it <= cap; ++it) {
    y.noalias() = m * x;
    const double s = y.sum();
    out.iterations = it;
    if (!(s > 0.0)) {
      lambda = 0.0;
      change = 0.0;
      break;
    }
    change = it == 1 ? std::numeric_limits<double>::infinity() : std::abs(s - lambda) / s;
    lambda = s;
    x = y / s;
    // Collatz-Wielandt bracket on the new iterate
    const Eigen::VectorXd mx = m * x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) > 0.0) {
        const double r = mx(i) / x(i);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
    if (hi - lo <= tol * hi) {
      lambda = 0.5 * (hi + lo);
      change = 0.0;
      break;
    }
    quiet = change <= tol ? quiet + 1 : 0;
    if (quiet >= 3) break;
  }
  out.rho = lambda;
  out.stalled = change > 1e-10;
  const Eigen::VectorXd mx = m * x;
  double hi = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0.0) hi = std::max(hi, mx(i) / x(i));
  }
  out.rho_upper = std::max(hi, out.rho);
  return out;
}

CVector row_denominators(const WeightProfile& profile, std::span<const cplx> e, SpectralPoint z) {
  const std::size_t n = profile.rows();
  const std::size_t N = profile.cols();
  require_length(e, N);
  require_upper_half(e);
  const double c = profile.ratio();
  Eigen::VectorXcd q(static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < N; ++k) q(static_cast<Eigen::Index>(k)) = 1.0 / (static_cast<double>(N) * (1.0 + c * e[k]));
  const Eigen::VectorXcd s = mat_vec(profile.squared(), q);
  CVector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = s(static_cast<Eigen::Index>(i)) - z.z();
  return out;
}

CVector iterate_e(const WeightProfile& profile, std::span<const cplx> e, SpectralPoint z) {
  const CVector denom = row_denominators(profile, e, z);
  const std::size_t n = profile.rows();
  Eigen::VectorXcd t(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) t(static_cast<Eigen::Index>(i)) = 1.0 / (static_cast<double>(n) * denom[i]);
  const Eigen::VectorXcd img = mat_t_vec(profile.squared(), t);
  return CVector(img.data(), img.data() + img.size());
}

Eigen::MatrixXcd coupling_matrix(const WeightProfile& profile, std::span<const cplx> e, std::span<const cplx> ebar,
                                 SpectralPoint z) {
  const CVector d1 = row_denominators(profile, e, z);
  const CVector d2 = row_denominators(profile, ebar, z);
  const std::size_t n = profile.rows();
  const std::size_t N = profile.cols();
  const double c = profile.ratio();
  Eigen::VectorXcd w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) w(static_cast<Eigen::Index>(i)) = 1.0 / (d1[i] * d2[i]);
  const Eigen::MatrixXd& D2 = profile.squared();
  Eigen::MatrixXcd s(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  s.real() = D2.transpose() * w.real().asDiagonal() * D2;
  s.imag() = D2.transpose() * w.imag().asDiagonal() * D2;
  const double inv_n2 = 1.0 / (static_cast<double>(N) * static_cast<double>(N));
  for (std::size_t k = 0; k < N; ++k) {
    const cplx col_scale = inv_n2 / ((1.0 + c * e[k]) * (1.0 + c * ebar[k]));
    s.col(static_cast<Eigen::Index>(k)) *= col_scale;
  }
  return s;
}

FixedPointSolver::FixedPointSolver(const WeightProfile& profile, SolverConfig cfg)
    : cfg_(cfg), n_(profile.rows()), N_(profile.cols()), c_(profile.ratio()) {
  cfg_.validate();
  const Eigen::MatrixXd& D2 = profile.squared();
  group_columns(D2, col_class_, col_rep_);
  const Eigen::Index K = static_cast<Eigen::Index>(col_rep_.size());
  Eigen::MatrixXd reduced_cols(D2.rows(), K);
  col_mult_ = Eigen::VectorXd::Zero(K);
  for (Eigen::Index k = 0; k < K; ++k) reduced_cols.col(k) = D2.col(static_cast<Eigen::Index>(col_rep_[static_cast<std::size_t>(k)]));
  for (std::size_t j = 0; j < N_; ++j) col_mult_(static_cast<Eigen::Index>(col_class_[j])) += 1.0;

  // Rows are grouped on the transposed column-reduced matrix.
  const Eigen::MatrixXd rows_t = reduced_cols.transpose();
  std::vector<std::size_t> row_class;
  std::vector<std::size_t> row_rep;
  group_columns(rows_t, row_class, row_rep);
  const Eigen::Index R = static_cast<Eigen::Index>(row_rep.size());
  w2_.resize(R, K);
  row_mult_ = Eigen::VectorXd::Zero(R);
  for (Eigen::Index r = 0; r < R; ++r) w2_.row(r) = reduced_cols.row(static_cast<Eigen::Index>(row_rep[static_cast<std::size_t>(r)]));
  for (std::size_t i = 0; i < n_; ++i) row_mult_(static_cast<Eigen::Index>(row_class[i])) += 1.0;

  col_mass_ = (w2_.transpose() * row_mult_) / static_cast<double>(n_);
}

FixedPointSolver::Evaluation FixedPointSolver::evaluate(const Eigen::VectorXcd& e, cplx z) const {
  const double N = static_cast<double>(N_);
  const double n = static_cast<double>(n_);
  Eigen::VectorXcd q(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) q(k) = col_mult_(k) / (N * (1.0 + c_ * e(k)));
  Evaluation ev;
  ev.denom = mat_vec(w2_, q);
  ev.denom.array() -= z;
  Eigen::VectorXcd t(ev.denom.size());
  for (Eigen::Index r = 0; r < t.size(); ++r) t(r) = row_mult_(r) / (n * ev.denom(r));
  ev.image = mat_t_vec(w2_, t);
  ev.residual = max_abs(ev.image - e);
  return ev;
}

Eigen::MatrixXcd FixedPointSolver::jacobian(const Eigen::VectorXcd& e, const Eigen::VectorXcd& denom) const {
  const double n = static_cast<double>(n_);
  const double N = static_cast<double>(N_);
  Eigen::VectorXcd alpha(denom.size());
  for (Eigen::Index r = 0; r < denom.size(); ++r) alpha(r) = row_mult_(r) / (n * denom(r) * denom(r));
  Eigen::MatrixXcd J(e.size(), e.size());
  J.real() = w2_.transpose() * alpha.real().asDiagonal() * w2_;
  J.imag() = w2_.transpose() * alpha.imag().asDiagonal() * w2_;
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    const cplx one_plus = 1.0 + c_ * e(k);
    J.col(k) *= c_ * col_mult_(k) / (N * one_plus * one_plus);
  }
  return J;
}

void FixedPointSolver::certify(FixedPointSolution& sol, const Eigen::VectorXcd& e, const Eigen::VectorXcd& denom) const {
  // Lumped C0: entries summed over each column class. Because C0 maps
  // class-constant vectors to class-constant vectors, its Perron root and
  // the row-wise identity defect coincide with those of the full matrix.
  const double n = static_cast<double>(n_);
  const double N = static_cast<double>(N_);
  const Eigen::VectorXd w = row_mult_.array() / denom.array().abs2();
  Eigen::MatrixXd C = w2_.transpose() * w.asDiagonal() * w2_;
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    C.col(k) *= col_mult_(k) / (N * N * std::norm(1.0 + c_ * e(k)));
  }
  const Eigen::VectorXd b = (w2_.transpose() * w) / n;
  const Eigen::VectorXd e2 = e.imag();
  const PerronEstimate pe = perron_radius(C, b);
  sol.rho_C0 = pe.rho;
  sol.power_stalled = pe.stalled;
  sol.identity_defect = (e2 - C * e2 - sol.z.v() * b).cwiseAbs().maxCoeff();
  sol.certified = true;
}

FixedPointSolution FixedPointSolver::solve(SpectralPoint zp, std::span<const cplx> warm_start) const {
  const cplx z = zp.z();
  const Eigen::Index K = static_cast<Eigen::Index>(col_rep_.size());
  const Eigen::Index R = static_cast<Eigen::Index>(row_mult_.size());

  Eigen::VectorXcd e(K);
  if (!warm_start.empty()) {
    require_length(warm_start, N_);
    require_upper_half(warm_start);
    for (Eigen::Index k = 0; k < K; ++k) e(k) = warm_start[col_rep_[static_cast<std::size_t>(k)]];
  } else {
    for (Eigen::Index k = 0; k < K; ++k) e(k) = cplx(0.0, col_mass_(k) / zp.v());
  }

  FixedPointSolution sol;
  sol.z = zp;
  Evaluation ev = evaluate(e, z);

  // Cost of one Newton step measured in damped sweeps (Jacobian assembly
  // plus the dense LU solve).
  const double kd = static_cast<double>(K);
  const double newton_cost = 1.0 + kd + kd * kd / static_cast<double>(std::max<Eigen::Index>(R, 1));
  double alpha = cfg_.damping;
  std::size_t streak = 0;
  std::size_t cooldown = 0;
  double log_rate = 0.0;
  std::size_t rate_samples = 0;

  auto target = [&]() { return std::max(cfg_.tol, 16.0 * kEps * max_abs(e)); };

  while (true) {
    if (ev.residual <= target()) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= cfg_.max_iter) break;
    ++sol.iterations;

    if (cfg_.newton && cooldown == 0 && ev.residual <= cfg_.newton_switch * std::max(1.0, max_abs(e))) {
      bool worth_it = newton_cost <= 4.0;
      if (!worth_it && rate_samples >= 3) {
        const double rate = std::exp(log_rate / static_cast<double>(rate_samples));
        const double remaining = rate >= 1.0 ? std::numeric_limits<double>::infinity()
                                             : std::log(target() / ev.residual) / std::log(rate);
        worth_it = remaining > 3.0 * newton_cost;
      }
      if (worth_it) {
        Eigen::MatrixXcd M = -jacobian(e, ev.denom);
        M.diagonal().array() += 1.0;
        const Eigen::VectorXcd step = M.partialPivLu().solve(ev.image - e);
        const Eigen::VectorXcd cand = e + step;
        if (in_upper_half(cand)) {
          Evaluation ec = evaluate(cand, z);
          if (ec.residual < ev.residual) {
            e = cand;
            ev = std::move(ec);
            ++sol.newton_steps;
            continue;
          }
        }
        cooldown = kNewtonCooldown;
      }
    }
    if (cooldown > 0) --cooldown;

    const Eigen::VectorXcd cand = (1.0 - alpha) * e + alpha * ev.image;
    if (!in_upper_half(cand)) {
      ++sol.rejected_steps;
      alpha = std::max(alpha / 2.0, kMinDamping);
      streak = 0;
      continue;
    }
    Evaluation ec = evaluate(cand, z);
    if (ec.residual > ev.residual) {
      alpha = std::max(alpha / 2.0, kMinDamping);
      streak = 0;
    } else if (++streak >= kDampingResetStreak) {
      alpha = cfg_.damping;
      streak = 0;
    }
    if (ev.residual > 0.0 && ec.residual > 0.0) {
      const double r = std::log(ec.residual / ev.residual);
      // Moving average over the last few sweeps.
      if (rate_samples < 5) {
        log_rate += r;
        ++rate_samples;
      } else {
        log_rate += r - log_rate / static_cast<double>(rate_samples);
      }
    }
    e = cand;
    ev = std::move(ec);
  }

  sol.residual = ev.residual;
  sol.e0.resize(N_);
  for (std::size_t j = 0; j < N_; ++j) sol.e0[j] = e(static_cast<Eigen::Index>(col_class_[j]));
  cplx g = 0.0;
  for (Eigen::Index r = 0; r < R; ++r) g += row_mult_(r) / ev.denom(r);
  sol.g = g / static_cast<double>(n_);
  if (cfg_.certify) {
    certify(sol, e, ev.denom);
  } else {
    sol.rho_C0 = std::numeric_limits<double>::quiet_NaN();
    sol.identity_defect = std::numeric_limits<double>::quiet_NaN();
  }
  return sol;
}

FixedPointSolution solve_e0(const WeightProfile& profile, SpectralPoint z, const SolverConfig& cfg,
                            std::span<const cplx> warm_start) {
  return FixedPointSolver(profile, cfg).solve(z, warm_start);
}

cplx evaluate_G(const WeightProfile& profile, const FixedPointSolution& sol) {
  const CVector denom = row_denominators(profile, sol.e0, sol.z);
  cplx g = 0.0;
  for (const cplx& d : denom) g += 1.0 / d;
  return g / static_cast<double>(profile.rows());
}

ContractionDiagnostics build_certificate(const WeightProfile& profile, const FixedPointSolution& sol) {
  const CVector denom = row_denominators(profile, sol.e0, sol.z);
  const std::size_t n = profile.rows();
  const std::size_t N = profile.cols();
  const double c = profile.ratio();
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) w(static_cast<Eigen::Index>(i)) = 1.0 / std::norm(denom[i]);
  const Eigen::MatrixXd& D2 = profile.squared();

  ContractionDiagnostics diag;
  diag.C0 = D2.transpose() * w.asDiagonal() * D2;
  const double inv_n2 = 1.0 / (static_cast<double>(N) * static_cast<double>(N));
  diag.e2.resize(static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < N; ++k) {
    diag.C0.col(static_cast<Eigen::Index>(k)) *= inv_n2 / std::norm(1.0 + c * sol.e0[k]);
    diag.e2(static_cast<Eigen::Index>(k)) = sol.e0[k].imag();
  }
  diag.b0 = (D2.transpose() * w) / static_cast<double>(n);
  const PerronEstimate pe = perron_radius(diag.C0, diag.b0);
  diag.rho = pe.rho;
  diag.rho_upper = pe.rho_upper;
  diag.power_iterations = pe.iterations;
  diag.power_stalled = pe.stalled;
  diag.identity_defect = (diag.e2 - diag.C0 * diag.e2 - sol.z.v() * diag.b0).cwiseAbs().maxCoeff();
  return diag;
}

std::vector<FixedPointSolution> solve_grid(const WeightProfile& profile, const ZGrid& grid, const SolverConfig& cfg) {
  const FixedPointSolver solver(profile, cfg);
  std::vector<FixedPointSolution> out;
  out.reserve(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const SpectralPoint& z = grid[p];
    std::span<const cplx> warm;
    if (cfg.continuation) {
      double best = std::numeric_limits<double>::infinity();
      for (const FixedPointSolution& prev : out) {
        if (prev.e0.empty() || !prev.converged) continue;
        const double dist = std::abs(prev.z.z() - z.z());
        if (dist < best) {
          best = dist;
          warm = prev.e0;
        }
      }
    }
    try {
      out.push_back(solver.solve(z, warm));
    } catch (const Error&) {
      FixedPointSolution failed;
      failed.z = z;
      failed.converged = false;
      failed.residual = std::numeric_limits<double>::infinity();
      out.push_back(std::move(failed));
    }
  }
  return out;
}

}  // namespace hs
