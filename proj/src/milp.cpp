#include "polyrlt/milp.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "polyrlt/errors.hpp"

namespace polyrlt {
namespace {

constexpr double kIntegralityTol = 1e-6;

struct MilpNode {
  double bound = 0.0;
  long seq = 0;
  // Bounds of the integral columns, parallel to integral_columns.
  std::vector<double> lower;
  std::vector<double> upper;
};

struct WorseNode {
  bool operator()(const MilpNode& a, const MilpNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

bool within_gap(double incumbent, double bound, double gap_tol) {
  if (std::isinf(incumbent)) return false;
  const double gap = incumbent - bound;
  return gap <= 1e-9 || gap <= gap_tol * std::max(std::abs(incumbent), 1e-9);
}

}  // namespace

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::optimal:
      return "optimal";
    case MilpStatus::infeasible:
      return "infeasible";
    case MilpStatus::bound_only:
      return "bound_only";
    case MilpStatus::failed:
      return "failed";
  }
  return "unknown";
}

std::optional<std::size_t> most_fractional(std::span<const double> x,
                                           std::span<const std::size_t> integral_columns) {
  std::optional<std::size_t> best;
  double best_distance = kIntegralityTol;
  for (std::size_t col : integral_columns) {
    const double distance = std::abs(x[col] - std::round(x[col]));
    if (distance > best_distance || (best && distance == best_distance && col < *best)) {
      best_distance = distance;
      best = col;
    }
  }
  return best;
}

MilpResult solve_milp(const LinearProgram& lp, std::span<const std::size_t> integral_columns,
                      const MilpBudget& budget, double gap_tol, const LpResult* root) {
  if (!(budget.time_seconds > 0.0) || budget.node_limit <= 0) {
    throw UsageError("solve_milp: budget must be positive");
  }
  for (std::size_t col : integral_columns) {
    if (col >= lp.num_cols || !std::isfinite(lp.col_lower[col]) ||
        !std::isfinite(lp.col_upper[col])) {
      throw UsageError("solve_milp: integral columns need finite bounds");
    }
  }
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(budget.time_seconds));
  LpOptions lp_options;
  lp_options.deadline = deadline;

  MilpResult result;
  LinearProgram work = lp;
  LpResult root_result = root ? *root : solve_lp(work, lp_options);
  result.nodes_used = 1;
  if (root_result.status == LpStatus::stalled || root_result.status == LpStatus::unbounded) {
    result.status = MilpStatus::failed;
    return result;
  }
  if (root_result.status == LpStatus::infeasible) {
    result.status = MilpStatus::infeasible;
    result.best_bound = MilpResult::kNoValue;
    return result;
  }
  const double root_bound = root_result.objective;

  std::priority_queue<MilpNode, std::vector<MilpNode>, WorseNode> open;
  long seq = 0;
  double incumbent = MilpResult::kNoValue;
  double stalled_floor = MilpResult::kNoValue;

  auto consider = [&](const LpResult& node_lp, const MilpNode& node) {
    if (node_lp.status == LpStatus::infeasible) return;
    if (node_lp.status != LpStatus::optimal) {
      stalled_floor = std::min(stalled_floor, node.bound);
      return;
    }
    if (node_lp.objective >= incumbent - 1e-9) return;
    auto branch_col = most_fractional(node_lp.x, integral_columns);
    if (!branch_col) {
      incumbent = node_lp.objective;
      result.x = node_lp.x;
      result.objective = node_lp.objective;
      return;
    }
    const auto k = static_cast<std::size_t>(
        std::find(integral_columns.begin(), integral_columns.end(), *branch_col) -
        integral_columns.begin());
    const double value = node_lp.x[*branch_col];
    MilpNode down = node;
    down.bound = std::max(node.bound, node_lp.objective);
    down.upper[k] = std::floor(value);
    down.seq = seq++;
    MilpNode up = node;
    up.bound = down.bound;
    up.lower[k] = std::ceil(value);
    up.seq = seq++;
    open.push(std::move(down));
    open.push(std::move(up));
  };

  MilpNode root_node;
  root_node.bound = root_bound;
  for (std::size_t col : integral_columns) {
    root_node.lower.push_back(lp.col_lower[col]);
    root_node.upper.push_back(lp.col_upper[col]);
  }
  root_node.seq = seq++;
  consider(root_result, root_node);

  bool budget_hit = false;
  while (!open.empty()) {
    const MilpNode& top = open.top();
    if (top.bound >= incumbent - 1e-9 || within_gap(incumbent, top.bound, gap_tol)) break;
    if (result.nodes_used >= budget.node_limit || Clock::now() >= deadline) {
      budget_hit = true;
      break;
    }
    MilpNode node = top;
    open.pop();
    for (std::size_t k = 0; k < integral_columns.size(); ++k) {
      work.col_lower[integral_columns[k]] = node.lower[k];
      work.col_upper[integral_columns[k]] = node.upper[k];
    }
    const LpResult node_lp = solve_lp(work, lp_options);
    ++result.nodes_used;
    consider(node_lp, node);
  }

  double open_bound = open.empty() ? MilpResult::kNoValue : open.top().bound;
  open_bound = std::min(open_bound, stalled_floor);
  result.best_bound = std::max(root_bound, std::min(open_bound, incumbent));

  if (result.x && !budget_hit && std::isinf(stalled_floor)) {
    result.status = MilpStatus::optimal;
  } else if (result.x && within_gap(incumbent, result.best_bound, gap_tol)) {
    result.status = MilpStatus::optimal;
  } else if (!result.x && open.empty() && std::isinf(stalled_floor)) {
    result.status = MilpStatus::infeasible;
    result.best_bound = MilpResult::kNoValue;
  } else {
    result.status = MilpStatus::bound_only;
  }
  return result;
}

}  // namespace polyrlt
