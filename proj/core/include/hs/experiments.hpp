#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hs/core.hpp"
#include "hs/fixed_point.hpp"
#include "hs/profiles.hpp"
#include "hs/random_spectra.hpp"
#include "hs/stieltjes.hpp"
#include "hs/tightness.hpp"

namespace hs {

struct ExperimentSpec {
  ProfileGenerator profile;
  std::vector<std::pair<std::size_t, std::size_t>> sizes;   // (n, N)
  EntrySampler sampler;
  std::optional<TruncationPipelineConfig> pipeline;
  double epsilon = 0.1;
  std::size_t trials = 5;
  std::uint64_t master_seed = 0;
  std::size_t i_max = 24;
  std::size_t ladder_depth = 4;     // epsilons 1/2, 1/4, ..., 2^-depth; 0 disables
  std::size_t grid_points = 801;
  std::optional<double> xmin;       // default from the norm bound of the profile
  std::optional<double> xmax;
  InversionConfig inversion;        // x_grid filled per size
  SolverConfig solver;
  unsigned threads = 1;

  void validate() const;
};

/// Flat sectioned key/value text:
///
///   [experiment]  profile, sizes (e.g. "64x64, 128x128"), family, complex,
///                 epsilon, trials, seed, i_max, ladder_depth, threads
///   [pipeline]    enabled, eta_n, center, rescale
///   [inversion]   eta (comma list), points, xmin, xmax, extrapolation,
///                 edge_tolerance, certify_stride, detect_atom
///   [solver]      tol, max_iter, damping, newton, continuation
///
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentSpec parse_experiment_spec(std::string_view text);
ExperimentSpec load_experiment_spec(const std::string& path);
std::string experiment_spec_text(const ExperimentSpec& spec);

/// Grid range [lo, hi] covering the spectrum of B for this profile.
std::pair<double, double> default_x_range(const WeightProfile& profile);

struct ComparisonRow {
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double d_value = 0.0;
  double d_tail = 0.0;
  double ks = 0.0;
  double rho_max = 0.0;
  double residual_max = 0.0;
  double runtime_s = 0.0;
  bool trusted = false;
  std::string error;               // empty on success
};

struct SizeSummary {
  std::size_t n = 0;
  std::size_t N = 0;
  double M = 0.0;
  std::size_t rows_removed = 0;
  std::size_t cols_removed = 0;
  double atom_at_zero = 0.0;
  double total_mass = 0.0;
  std::size_t gap_count = 0;
  std::size_t trusted_trials = 0;
  double median_ks = 0.0;          // over trusted rows, NaN when none
  double median_d = 0.0;
  double curve_runtime_s = 0.0;
  std::string error;
};

struct LadderEntry {
  double epsilon = 0.0;
  double M = 0.0;
  bool feasible = false;           // truncated profile keeps every column
  double median_d = 0.0;
  bool passed = false;             // feasible, trusted and median D <= epsilon
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<SizeSummary> sizes;
  std::vector<LadderEntry> ladder;
  double ladder_epsilon = 0.0;     // smallest passing ladder value, NaN when none
};

/// Per size: generate D, plan at epsilon, truncate at M, invert the
/// deterministic equivalent once, simulate `trials` spectra of B built from
/// the untruncated D, and compare. Failures are recorded, never thrown.
ComparisonReport run_experiment(const ExperimentSpec& spec);

}  // namespace hs
