#include "hs/random_spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hs/error.hpp"
#include "hs/parallel.hpp"

namespace hs {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kDegenerateSigma = 1e-12;

// two_point_asym support and weights
constexpr std::array<double, 2> kTwoPointValues{2.0, -0.5};
constexpr std::array<double, 2> kTwoPointWeights{0.2, 0.8};

double draw_real(EntryFamily family, std::mt19937_64& rng) {
  switch (family) {
    case EntryFamily::rademacher:
      return (rng() >> 63) ? 1.0 : -1.0;
    case EntryFamily::uniform_pm:
      return std::uniform_real_distribution<double>(-kSqrt3, kSqrt3)(rng);
    case EntryFamily::gaussian:
      return std::normal_distribution<double>(0.0, 1.0)(rng);
    case EntryFamily::two_point_asym:
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < kTwoPointWeights[0] ? kTwoPointValues[0]
                                                                                          : kTwoPointValues[1];
  }
  return 0.0;
}

// E|x|^2 I(|x| <= T) for complex uniform entries: real and imaginary parts
// uniform on [-s, s], s = sqrt(3/2), cut on the modulus.
TruncatedMoments complex_uniform_moments(double T) {
  const double s = std::sqrt(1.5);
  const double area = 4.0 * s * s;
  TruncatedMoments m;
  if (T * T >= 2.0 * s * s) {
    m.variance = 1.0;
    return m;
  }
  const double umax = std::min(s, T);
  auto half_height = [&](double u) { return std::min(s, std::sqrt(std::max(0.0, T * T - u * u))); };
  auto second = [&](double u) {
    const double y = half_height(u);
    return (2.0 * y * u * u + 2.0 * y * y * y / 3.0) / area;
  };
  auto prob = [&](double u) { return 2.0 * half_height(u) / area; };
  // The height switches from s to the circle at u = sqrt(T^2 - s^2).
  std::vector<double> cuts{0.0};
  if (T > s) cuts.push_back(std::sqrt(T * T - s * s));
  cuts.push_back(umax);
  double second_moment = 0.0;
  double p = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    second_moment += 2.0 * GK::integrate(second, cuts[k], cuts[k + 1], 15, 1e-15);
    p += 2.0 * GK::integrate(prob, cuts[k], cuts[k + 1], 15, 1e-15);
  }
  m.variance = second_moment;
  m.tail_probability = 1.0 - p;
  return m;
}

TruncatedMoments discrete_moments(const std::vector<cplx>& values, const std::vector<double>& weights, double T) {
  TruncatedMoments m;
  double second = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::abs(values[k]) <= T) {
      m.mean += weights[k] * values[k];
      second += weights[k] * std::norm(values[k]);
    } else {
      m.tail_probability += weights[k];
    }
  }
  m.variance = std::max(0.0, second - std::norm(m.mean));
  return m;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view family_name(EntryFamily family) noexcept {
  switch (family) {
    case EntryFamily::rademacher: return "rademacher";
    case EntryFamily::uniform_pm: return "uniform_pm";
    case EntryFamily::gaussian: return "gaussian";
    case EntryFamily::two_point_asym: return "two_point_asym";
  }
  return "unknown";
}

EntryFamily parse_family(std::string_view name) {
  for (EntryFamily f : {EntryFamily::rademacher, EntryFamily::uniform_pm, EntryFamily::gaussian,
                        EntryFamily::two_point_asym}) {
    if (family_name(f) == name) return f;
  }
  throw Error(Errc::parse_error, "unknown entry family '" + std::string(name) + "'");
}

TruncatedMoments truncated_moments(const EntryLaw& law, double T) {
  if (!(T > 0.0)) throw Error(Errc::invalid_argument, "truncation threshold must be positive");
  if (!law.family) {
    return discrete_moments({law.point_mass}, {1.0}, T);
  }
  const double r2 = std::numbers::sqrt2;
  TruncatedMoments m;
  switch (*law.family) {
    case EntryFamily::rademacher:
      // |x| = 1 for the real and the complex variant alike.
      if (T >= 1.0) {
        m.variance = 1.0;
      } else {
        m.tail_probability = 1.0;
      }
      return m;
    case EntryFamily::two_point_asym: {
      std::vector<cplx> values;
      std::vector<double> weights;
      if (law.complex_entries) {
        for (std::size_t a = 0; a < 2; ++a) {
          for (std::size_t b = 0; b < 2; ++b) {
            values.emplace_back(kTwoPointValues[a] / r2, kTwoPointValues[b] / r2);
            weights.push_back(kTwoPointWeights[a] * kTwoPointWeights[b]);
          }
        }
      } else {
        for (std::size_t a = 0; a < 2; ++a) {
          values.emplace_back(kTwoPointValues[a], 0.0);
          weights.push_back(kTwoPointWeights[a]);
        }
      }
      return discrete_moments(values, weights, T);
    }
    case EntryFamily::gaussian:
      if (law.complex_entries) {
        // |x|^2 ~ Exp(1)
        const double tail = std::exp(-T * T);
        m.variance = 1.0 - tail * (1.0 + T * T);
        m.tail_probability = tail;
      } else {
        const double phi = std::exp(-0.5 * T * T) / std::sqrt(2.0 * std::numbers::pi);
        m.variance = std::erf(T / r2) - 2.0 * T * phi;
        m.tail_probability = std::erfc(T / r2);
      }
      return m;
    case EntryFamily::uniform_pm:
      if (law.complex_entries) return complex_uniform_moments(T);
      if (T >= kSqrt3) {
        m.variance = 1.0;
      } else {
        m.variance = T * T * T / (3.0 * kSqrt3);
        m.tail_probability = 1.0 - T / kSqrt3;
      }
      return m;
  }
  return m;
}

void TruncationPipelineConfig::validate() const {
  if (!(eta_n > 0.0) || !std::isfinite(eta_n)) throw Error(Errc::invalid_argument, "eta_n must be positive");
}

Eigen::MatrixXcd sample_matrix(std::size_t n, std::size_t N, const EntrySampler& sampler) {
  if (n == 0 || N == 0) throw Error(Errc::invalid_argument, "sample_matrix needs n, N >= 1");
  std::mt19937_64 rng(sampler.seed);
  Eigen::MatrixXcd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(N));
  const double scale = sampler.complex_entries ? 1.0 / std::numbers::sqrt2 : 1.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double re = draw_real(sampler.family, rng) * scale;
      const double im = sampler.complex_entries ? draw_real(sampler.family, rng) * scale : 0.0;
      X(i, j) = cplx(re, im);
    }
  }
  return X;
}

PipelineResult truncate_center_rescale(const Eigen::MatrixXcd& X, const TruncationPipelineConfig& cfg,
                                       const EntryLaw& law) {
  cfg.validate();
  PipelineResult out;
  out.threshold = cfg.eta_n * std::sqrt(static_cast<double>(X.rows()));
  out.moments = truncated_moments(law, out.threshold);
  const double sigma = std::sqrt(out.moments.variance);
  const bool degenerate = cfg.apply_rescale && sigma < kDegenerateSigma;
  out.X.resize(X.rows(), X.cols());
  std::vector<bool> row_hit(static_cast<std::size_t>(X.rows()), false);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      cplx x = X(i, j);
      if (std::abs(x) > out.threshold) {
        x = 0.0;
        ++out.truncated_entries;
        row_hit[static_cast<std::size_t>(i)] = true;
      }
      if (cfg.apply_center) x -= out.moments.mean;
      if (cfg.apply_rescale) {
        if (degenerate) {
          x = 0.0;
          ++out.degenerate_entries;
        } else {
          x /= sigma;
        }
      }
      out.X(i, j) = x;
    }
  }
  for (std::size_t i = 0; i < row_hit.size(); ++i) {
    if (row_hit[i]) out.truncated_rows.push_back(i);
  }
  return out;
}

Eigen::MatrixXcd build_B(const WeightProfile& profile, const Eigen::MatrixXcd& X) {
  if (static_cast<std::size_t>(X.rows()) != profile.rows() || static_cast<std::size_t>(X.cols()) != profile.cols()) {
    throw Error(Errc::dimension_mismatch, "X is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                                              ", profile is " + std::to_string(profile.rows()) + "x" +
                                              std::to_string(profile.cols()));
  }
  const Eigen::MatrixXcd Y = X.cwiseProduct(profile.entries().cast<cplx>());
  Eigen::MatrixXcd B = (Y * Y.adjoint()) / static_cast<double>(profile.cols());
  // Exact Hermitian symmetry; GEMM rounding may differ across the diagonal.
  const Eigen::MatrixXcd Bh = 0.5 * (B + B.adjoint());
  B = Bh;
  for (Eigen::Index i = 0; i < B.rows(); ++i) B(i, i) = cplx(B(i, i).real(), 0.0);
  return B;
}

HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& B, bool with_vectors) {
  if (B.rows() != B.cols()) throw Error(Errc::dimension_mismatch, "eigenvalue input must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(B, with_vectors ? Eigen::ComputeEigenvectors
                                                                         : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::convergence_failure, "Hermitian eigensolver did not converge");
  }
  HermitianEigen out;
  const Eigen::VectorXd& ev = solver.eigenvalues();
  out.values.assign(ev.data(), ev.data() + ev.size());
  if (with_vectors) out.vectors = solver.eigenvectors();
  return out;
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& B) { return hermitian_eigen(B, false).values; }

std::vector<double> singular_values(const Eigen::MatrixXcd& M) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  const Eigen::VectorXd& s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index ^ 0x6A09E667F3BCC909ULL));
}

std::vector<EmpiricalDistribution> empirical_spectrum(const WeightProfile& profile, const EntrySampler& sampler,
                                                      const std::optional<TruncationPipelineConfig>& pipeline,
                                                      std::size_t trials, std::uint64_t master_seed,
                                                      unsigned threads) {
  if (trials < 1) throw Error(Errc::invalid_argument, "trials must be at least 1");
  if (pipeline) pipeline->validate();
  std::vector<EmpiricalDistribution> out(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    EntrySampler s = sampler;
    s.seed = derive_seed(master_seed, t);
    Eigen::MatrixXcd X = sample_matrix(profile.rows(), profile.cols(), s);
    if (pipeline) X = truncate_center_rescale(X, *pipeline, EntryLaw::of(s)).X;
    out[t] = EmpiricalDistribution(hermitian_eigenvalues(build_B(profile, X)));
  });
  return out;
}

}  // namespace hs
