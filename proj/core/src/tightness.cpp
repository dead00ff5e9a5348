#include "hs/tightness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/max_cardinality_matching.hpp>

#include "hs/error.hpp"

namespace hs {

namespace {

using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
using Vertex = boost::graph_traits<Graph>::vertex_descriptor;

struct Top2 {
  double first = -1.0;
  std::size_t arg = 0;
  double second = -1.0;

  void push(double value, std::size_t index) {
    if (value > first) {
      second = first;
      first = value;
      arg = index;
    } else if (value > second) {
      second = value;
    }
  }
  double without(std::size_t index) const { return index == arg ? std::max(second, 0.0) : std::max(first, 0.0); }
};

struct Cover {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

// Minimum line cover of the entries above t via a maximum matching and
// Konig's construction. Returns false when the cover exceeds the budget.
bool min_cover_above(const Eigen::MatrixXd& d, double t, std::size_t budget, Cover& out) {
  const std::size_t n = static_cast<std::size_t>(d.rows());
  const std::size_t N = static_cast<std::size_t>(d.cols());
  Graph g(n + N);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      if (d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > t) {
        boost::add_edge(i, n + j, g);
        adj[i].push_back(j);
      }
    }
  }
  std::vector<Vertex> mate(n + N);
  boost::edmonds_maximum_cardinality_matching(g, &mate[0]);
  const Vertex none = boost::graph_traits<Graph>::null_vertex();
  std::size_t matched = 0;
  for (std::size_t i = 0; i < n; ++i) matched += mate[i] != none ? 1 : 0;
  if (matched > budget) return false;

  std::vector<char> row_z(n, 0), col_z(N, 0);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (mate[i] == none) {
      row_z[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t j : adj[i]) {
      if (col_z[j] || mate[i] == n + j) continue;
      col_z[j] = 1;
      const Vertex partner = mate[n + j];
      if (partner != none && !row_z[partner]) {
        row_z[partner] = 1;
        queue.push_back(partner);
      }
    }
  }
  out.rows.clear();
  out.cols.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (!row_z[i]) out.rows.push_back(i);
  }
  for (std::size_t j = 0; j < N; ++j) {
    if (col_z[j]) out.cols.push_back(j);
  }
  return true;
}

std::size_t budget_for(const WeightProfile& profile, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  return static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(profile.rows())));
}

}  // namespace

double remaining_max(const WeightProfile& profile, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols) {
  std::vector<char> row_out(profile.rows(), 0), col_out(profile.cols(), 0);
  for (std::size_t i : rows) row_out.at(i) = 1;
  for (std::size_t j : cols) col_out.at(j) = 1;
  double m = 0.0;
  for (std::size_t j = 0; j < profile.cols(); ++j) {
    if (col_out[j]) continue;
    for (std::size_t i = 0; i < profile.rows(); ++i) {
      if (!row_out[i]) m = std::max(m, profile(i, j));
    }
  }
  return m;
}

TruncationPlan optimal_truncation(const WeightProfile& profile, std::size_t budget) {
  const Eigen::MatrixXd& d = profile.entries();
  std::vector<double> candidates(d.data(), d.data() + d.size());
  candidates.push_back(0.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Feasibility is monotone in t and always holds at the global max.
  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;
  Cover best;
  min_cover_above(d, candidates[hi], budget, best);
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    Cover cover;
    if (min_cover_above(d, candidates[mid], budget, cover)) {
      hi = mid;
      best = std::move(cover);
    } else {
      lo = mid + 1;
    }
  }
  TruncationPlan plan;
  plan.budget = budget;
  plan.rows_removed = std::move(best.rows);
  plan.cols_removed = std::move(best.cols);
  plan.M = remaining_max(profile, plan.rows_removed, plan.cols_removed);
  plan.greedy_M = plan.M;
  return plan;
}

TruncationPlan plan_truncation(const WeightProfile& profile, double epsilon, const PlanOptions& options) {
  const std::size_t budget = budget_for(profile, epsilon);
  const std::size_t n = profile.rows();
  const std::size_t N = profile.cols();
  const Eigen::MatrixXd& d = profile.entries();

  std::vector<char> row_active(n, 1), col_active(N, 1);
  std::size_t rows_left = n;
  std::size_t cols_left = N;
  struct Step {
    bool row;
    std::size_t index;
  };
  std::vector<Step> steps;
  std::vector<double> prefix_max{profile.max_entry()};

  std::vector<double> row_max(n), col_max(N);
  std::vector<std::size_t> row_count(n), col_count(N);
  while (steps.size() < budget && rows_left > 0 && cols_left > 0) {
    std::fill(row_max.begin(), row_max.end(), 0.0);
    std::fill(col_max.begin(), col_max.end(), 0.0);
    double current = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (!col_active[j]) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (!row_active[i]) continue;
        const double x = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        row_max[i] = std::max(row_max[i], x);
        col_max[j] = std::max(col_max[j], x);
        current = std::max(current, x);
      }
    }
    prefix_max[steps.size()] = current;
    if (current == 0.0) break;

    Top2 rows_top, cols_top;
    for (std::size_t i = 0; i < n; ++i) {
      if (row_active[i]) rows_top.push(row_max[i], i);
    }
    for (std::size_t j = 0; j < N; ++j) {
      if (col_active[j]) cols_top.push(col_max[j], j);
    }
    Step choice{true, 0};
    double best = current;
    for (std::size_t i = 0; i < n; ++i) {
      if (!row_active[i]) continue;
      const double left = rows_left > 1 ? rows_top.without(i) : 0.0;
      if (left < best) {
        best = left;
        choice = {true, i};
      }
    }
    for (std::size_t j = 0; j < N; ++j) {
      if (!col_active[j]) continue;
      const double left = cols_left > 1 ? cols_top.without(j) : 0.0;
      if (left < best) {
        best = left;
        choice = {false, j};
      }
    }
    if (!(best < current)) {
      std::fill(row_count.begin(), row_count.end(), 0);
      std::fill(col_count.begin(), col_count.end(), 0);
      for (std::size_t j = 0; j < N; ++j) {
        if (!col_active[j]) continue;
        for (std::size_t i = 0; i < n; ++i) {
          if (row_active[i] && d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == current) {
            ++row_count[i];
            ++col_count[j];
          }
        }
      }
      std::size_t most = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (row_active[i] && row_count[i] > most) {
          most = row_count[i];
          choice = {true, i};
        }
      }
      for (std::size_t j = 0; j < N; ++j) {
        if (col_active[j] && col_count[j] > most) {
          most = col_count[j];
          choice = {false, j};
        }
      }
    }
    if (choice.row) {
      row_active[choice.index] = 0;
      --rows_left;
    } else {
      col_active[choice.index] = 0;
      --cols_left;
    }
    steps.push_back(choice);
    prefix_max.push_back(best);
  }

  if (!steps.empty()) {
    std::vector<std::size_t> rs, cs;
    for (const Step& s : steps) (s.row ? rs : cs).push_back(s.index);
    prefix_max.back() = remaining_max(profile, rs, cs);
  }
  const std::size_t keep = static_cast<std::size_t>(
      std::min_element(prefix_max.begin(), prefix_max.end()) - prefix_max.begin());

  TruncationPlan plan;
  plan.epsilon = epsilon;
  plan.budget = budget;
  for (std::size_t s = 0; s < keep; ++s) (steps[s].row ? plan.rows_removed : plan.cols_removed).push_back(steps[s].index);
  std::sort(plan.rows_removed.begin(), plan.rows_removed.end());
  std::sort(plan.cols_removed.begin(), plan.cols_removed.end());
  plan.M = prefix_max[keep];
  plan.greedy_M = plan.M;

  if (options.exact_refinement && budget > 0 && plan.M > 0.0) {
    TruncationPlan exact = optimal_truncation(profile, budget);
    if (exact.M < plan.M) {
      exact.epsilon = epsilon;
      exact.greedy_M = plan.M;
      exact.refined = true;
      return exact;
    }
  }
  return plan;
}

bool plan_is_feasible(const WeightProfile& profile, const TruncationPlan& plan) {
  if (plan.rows_removed.size() + plan.cols_removed.size() > plan.budget) return false;
  if (static_cast<double>(plan.rows_removed.size() + plan.cols_removed.size()) >
      plan.epsilon * static_cast<double>(profile.rows())) {
    return false;
  }
  return remaining_max(profile, plan.rows_removed, plan.cols_removed) <= plan.M;
}

Eigen::MatrixXd truncated_entries(const WeightProfile& profile, double d_eps) {
  Eigen::MatrixXd out = profile.entries();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      if (out(i, j) > d_eps) out(i, j) = 0.0;
    }
  }
  return out;
}

WeightProfile truncate_profile(const WeightProfile& profile, double d_eps) {
  if (!std::isfinite(d_eps) || d_eps < 0.0) throw Error(Errc::invalid_argument, "d_eps must be finite and nonnegative");
  Eigen::MatrixXd out = truncated_entries(profile, d_eps);
  std::vector<std::size_t> empty;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (!(out.col(j).maxCoeff() > 0.0)) empty.push_back(static_cast<std::size_t>(j));
  }
  if (!empty.empty()) {
    throw Error(Errc::zero_column_after_truncation,
                std::to_string(empty.size()) + " column(s) vanish at d_eps = " + std::to_string(d_eps), empty);
  }
  return WeightProfile::validate(std::move(out));
}

}  // namespace hs
