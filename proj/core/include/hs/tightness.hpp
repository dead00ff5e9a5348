#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "hs/core.hpp"

namespace hs {

struct TruncationPlan {
  double epsilon = 0.0;
  double M = 0.0;                         // max entry outside removed lines
  std::vector<std::size_t> rows_removed;  // ascending
  std::vector<std::size_t> cols_removed;  // ascending
  std::size_t budget = 0;                 // floor(epsilon * n)
  double greedy_M = 0.0;                  // M reached by line peeling alone
  bool refined = false;                   // true when the exact cover beat the peeling
};

struct PlanOptions {
  // After peeling, look for a smaller M with a minimum line cover of the
  // entries above each candidate threshold (bipartite vertex cover).
  bool exact_refinement = true;
};

/// Remove at most floor(epsilon n) rows and columns so that the remaining
/// entries are as small as possible.
///
/// Peeling: each step removes the active line whose removal leaves the
/// smallest maximum (rows before columns, then lower index). When no single
/// line lowers the maximum, the line holding the most maximal entries goes.
/// The shortest prefix of the peeling sequence reaching the best maximum is
/// kept.
TruncationPlan plan_truncation(const WeightProfile& profile, double epsilon, const PlanOptions& options = {});

/// Smallest M reachable with at most `budget` removed lines, with one
/// optimal set of lines.
TruncationPlan optimal_truncation(const WeightProfile& profile, std::size_t budget);

/// Max entry outside the removed lines.
double remaining_max(const WeightProfile& profile, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols);

/// Both plan conditions: line count within budget and entries outside the
/// removed lines bounded by M.
bool plan_is_feasible(const WeightProfile& profile, const TruncationPlan& plan);

/// d_ij I(d_ij <= d_eps), without validation.
Eigen::MatrixXd truncated_entries(const WeightProfile& profile, double d_eps);

/// Validated d_ij I(d_ij <= d_eps). Throws ZeroColumnAfterTruncation listing
/// every column that lost all its mass.
WeightProfile truncate_profile(const WeightProfile& profile, double d_eps);

}  // namespace hs
