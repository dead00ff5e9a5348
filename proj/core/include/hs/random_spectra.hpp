#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hs/core.hpp"

namespace hs {

/// Standardized entry laws (mean 0, E|x|^2 = 1).
///  rademacher     : +-1 with probability 1/2
///  uniform_pm     : uniform on [-sqrt(3), sqrt(3)]
///  gaussian       : standard normal
///  two_point_asym : 2 with probability 1/5, -1/2 with probability 4/5
/// Complex entries draw real and imaginary parts independently from the law
/// scaled by 1/sqrt(2).
enum class EntryFamily { rademacher, uniform_pm, gaussian, two_point_asym };

std::string_view family_name(EntryFamily family) noexcept;
EntryFamily parse_family(std::string_view name);

struct EntrySampler {
  EntryFamily family = EntryFamily::rademacher;
  std::uint64_t seed = 0;
  bool complex_entries = false;
};

/// Distribution of a single entry: a sampler family, or a point mass (used
/// for degenerate test matrices).
struct EntryLaw {
  std::optional<EntryFamily> family;
  bool complex_entries = false;
  cplx point_mass{0.0, 0.0};

  static EntryLaw of(const EntrySampler& sampler) { return {sampler.family, sampler.complex_entries, {}}; }
  static EntryLaw constant(cplx value) { return {std::nullopt, false, value}; }
};

/// Exact moments of x I(|x| <= threshold).
struct TruncatedMoments {
  cplx mean{0.0, 0.0};
  double variance = 0.0;        // E|x I - E x I|^2
  double tail_probability = 0.0;
};

TruncatedMoments truncated_moments(const EntryLaw& law, double threshold);

struct TruncationPipelineConfig {
  double eta_n = 1.0;           // entries are cut at eta_n * sqrt(n)
  bool apply_center = true;
  bool apply_rescale = true;

  void validate() const;
};

struct PipelineResult {
  Eigen::MatrixXcd X;
  double threshold = 0.0;
  TruncatedMoments moments;
  std::size_t truncated_entries = 0;
  std::vector<std::size_t> truncated_rows;   // rows holding at least one cut entry
  std::size_t degenerate_entries = 0;        // entries zeroed because sigma < 1e-12
};

/// n x N matrix of iid entries; identical output for identical sampler.
Eigen::MatrixXcd sample_matrix(std::size_t n, std::size_t N, const EntrySampler& sampler);

/// Truncate at eta_n sqrt(n), subtract the exact truncated mean, divide by
/// the exact truncated standard deviation. Zero variance zeroes the entry.
PipelineResult truncate_center_rescale(const Eigen::MatrixXcd& X, const TruncationPipelineConfig& cfg,
                                       const EntryLaw& law);

/// B = (1/N) (D o X)(D o X)^*.
Eigen::MatrixXcd build_B(const WeightProfile& profile, const Eigen::MatrixXcd& X);

struct HermitianEigen {
  std::vector<double> values;            // ascending
  Eigen::MatrixXcd vectors;              // empty unless requested
};

HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& B, bool with_vectors);
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& B);

/// Singular values, ascending.
std::vector<double> singular_values(const Eigen::MatrixXcd& M);

/// Stream seed for trial `index` under `master`; order independent.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// One spectrum per trial. Trial t samples with seed derive_seed(master_seed, t);
/// the sampler contributes its family and complex flag, its own seed is unused.
std::vector<EmpiricalDistribution> empirical_spectrum(const WeightProfile& profile, const EntrySampler& sampler,
                                                      const std::optional<TruncationPipelineConfig>& pipeline,
                                                      std::size_t trials, std::uint64_t master_seed,
                                                      unsigned threads = 1);

}  // namespace hs
