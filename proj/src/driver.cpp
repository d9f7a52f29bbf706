#include "polyrlt/driver.hpp"

#include <algorithm>
#include <cmath>

#include "polyrlt/errors.hpp"
#include "polyrlt/milp.hpp"
#include "polyrlt/tighten.hpp"

namespace polyrlt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPruneTol = 1e-9;
constexpr double kThetaTol = 1e-9;
constexpr double kMinWidth = 1e-9;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

Clock::duration to_duration(double seconds) {
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

double fractionality(double v) { return std::abs(v - std::round(v)); }

class Solver {
 public:
  Solver(const Problem& problem, const SolverConfig& config)
      : problem_(problem), config_(config) {}

  SolveReport run();

 private:
  double elapsed() const { return seconds_between(start_, Clock::now()); }
  double remaining() const { return seconds_between(Clock::now(), deadline_); }
  double reserve() const { return config_.minlp_end_reserve * config_.time_limit; }

  void offer(std::optional<Incumbent> candidate);
  void refresh_lb();
  bool gap_closed() const;
  void record(NodeEvent event);
  void process(Node node);
  void split_on_failure(const Node& node, const Box& box);
  void run_nlp(std::span<const double> x_bar);
  void run_minlp(std::span<const double> x0, double budget, bool at_end);
  SolveReport finish(SolveStatus status);

  const Problem& problem_;
  const SolverConfig& config_;
  SolveReport report_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  Box root_box_;
  NodeQueue queue_;
  long next_id_ = 2;
  // Lower bound of nodes dropped without being resolved.
  double floor_ = kInf;
  std::optional<LpResult> root_lp_;
  std::vector<double> last_x_bar_;
  std::vector<double> iteration_lbs_;
  bool end_call_done_ = false;
};

void Solver::offer(std::optional<Incumbent> candidate) {
  if (!candidate || candidate->value >= report_.ub) return;
  report_.ub = candidate->value;
  report_.incumbent = std::move(candidate);
  report_.ub_history.emplace_back(elapsed(), report_.ub);
  prune(queue_, report_.ub);
}

void Solver::refresh_lb() {
  double current = queue_.empty() ? kInf : queue_.begin()->first.first;
  current = std::min({current, floor_, report_.ub});
  const double lb = std::min(std::max(report_.lb, current), report_.ub);
  report_.lb = lb;
  report_.lb_history.emplace_back(elapsed(), lb);
}

bool Solver::gap_closed() const {
  if (!std::isfinite(report_.ub) || !std::isfinite(report_.lb)) return false;
  return report_.ub - report_.lb <= config_.abs_gap ||
         relative_gap(report_.lb, report_.ub) <= config_.rel_gap;
}

void Solver::record(NodeEvent event) {
  event.lb = report_.lb;
  event.ub = report_.ub;
  event.time = elapsed();
  report_.events.push_back(std::move(event));
}

void Solver::run_nlp(std::span<const double> x_bar) {
  const double budget = std::min(config_.nlp_time_cap, remaining() - reserve());
  if (budget <= 0.0) return;
  const auto t0 = Clock::now();
  std::optional<Incumbent> found;
  switch (config_.nlp_strategy) {
    case NlpStrategy::round:
      found = try_round(problem_, x_bar, budget);
      break;
    case NlpStrategy::fix:
      found = try_fix(problem_, x_bar, budget);
      break;
    case NlpStrategy::round_fix:
      found = try_round_plus_fix(problem_, x_bar, budget);
      break;
    case NlpStrategy::off:
      break;
  }
  report_.nlp_ls_time += seconds_between(t0, Clock::now());
  offer(std::move(found));
}

void Solver::run_minlp(std::span<const double> x0, double budget, bool at_end) {
  budget = std::min(budget, remaining());
  if (budget <= 0.0) return;
  const auto t0 = Clock::now();
  auto found = minlp_local_solve(problem_, x0, budget);
  report_.minlp_ls_time += seconds_between(t0, Clock::now());
  ++(at_end ? report_.minlp_end_calls : report_.minlp_stuck_calls);
  offer(std::move(found));
}

// A node whose relaxation could not be solved keeps its potential; it is split
// at the midpoint of its widest variable so the search can continue.
void Solver::split_on_failure(const Node& node, const Box& box) {
  std::optional<std::size_t> widest;
  for (std::size_t j = 0; j < box.size(); ++j) {
    const double w = box.width(j);
    if (w > kMinWidth && (!widest || w > box.width(*widest))) widest = j;
  }
  NodeEvent event{node.id, node.depth, "lp", "failed", node.potential, std::nan("")};
  if (!widest) {
    floor_ = std::min(floor_, node.potential);
    record(event);
    return;
  }
  const std::size_t p = *widest;
  const double mid = 0.5 * (box.lower[p] + box.upper[p]);
  Node left{next_id_++, box, node.potential, node.depth + 1, 0};
  Node right{next_id_++, box, node.potential, node.depth + 1, 0};
  if (problem_.is_integer(p)) {
    left.box.upper[p] = std::floor(mid);
    right.box.lower[p] = std::floor(mid) + 1.0;
  } else {
    left.box.upper[p] = mid;
    right.box.lower[p] = mid;
  }
  push_node(queue_, std::move(left));
  push_node(queue_, std::move(right));
  event.branch_var = static_cast<int>(p);
  event.beta = mid;
  record(event);
}

void Solver::process(Node node) {
  ++report_.nodes;
  Box box = node.box;
  if (config_.fbbt && node.id != 1) {
    FbbtResult tightened = fbbt(problem_, box, config_.fbbt_max_passes);
    if (tightened.infeasible) {
      record({node.id, node.depth, "lp", "infeasible", node.potential, std::nan("")});
      return;
    }
    box = std::move(tightened.box);
  }

  bool milp_node = problem_.has_integers() &&
                   config_.integer_mode == IntegerMode::milp_at_depth &&
                   node.depth >= config_.milp_depth;
  const Relaxation relax =
      build_relaxation(problem_, box, milp_node ? RelaxationMode::milp : RelaxationMode::continuous);
  const char* kind = milp_node ? "milp" : "lp";

  // Without the root-LP safeguard the MILP subsolver is left to solve the
  // root LP itself under its own budget.
  const bool presolve_lp = !(milp_node && node.id == 1 && !config_.root_lp);
  LpResult lp;
  if (presolve_lp) {
    if (node.id == 1 && root_lp_) {
      lp = *root_lp_;
    } else {
      lp = solve_lp(relax.lp, LpOptions{100000, deadline_});
    }
    if (lp.status == LpStatus::infeasible) {
      record({node.id, node.depth, kind, "infeasible", node.potential, std::nan("")});
      return;
    }
    if (lp.status != LpStatus::optimal) {
      split_on_failure(node, box);
      return;
    }
    if (lp.objective >= report_.ub - kPruneTol) {
      record({node.id, node.depth, kind, "pruned", node.potential, lp.objective});
      return;
    }
  }

  LpSolution sol;
  double bound = presolve_lp ? lp.objective : -kInf;
  if (presolve_lp) sol = to_lp_solution(relax, lp, true);
  if (milp_node) {
    double budget = std::min(config_.milp_time_limit, remaining() - reserve());
    budget = std::max(budget, 1e-6);
    const auto integral = relax.integral_columns();
    const MilpResult milp = solve_milp(relax.lp, integral, {budget, config_.milp_node_limit},
                                       config_.rel_gap, presolve_lp ? &lp : nullptr);
    switch (milp.status) {
      case MilpStatus::infeasible:
        record({node.id, node.depth, kind, "infeasible", node.potential, std::nan("")});
        return;
      case MilpStatus::failed:
        split_on_failure(node, box);
        return;
      case MilpStatus::bound_only:
        node.potential = std::max(node.potential, milp.best_bound);
        if (node.milp_attempts < 1 || !presolve_lp) {
          ++node.milp_attempts;
          record({node.id, node.depth, kind, "requeued", node.potential, milp.best_bound});
          node.box = box;
          push_node(queue_, std::move(node));
          return;
        }
        // Second time out: continue from the LP solution as a continuous node.
        bound = std::max(bound, milp.best_bound);
        milp_node = false;
        kind = "lp";
        break;
      case MilpStatus::optimal: {
        LpResult as_lp;
        as_lp.status = LpStatus::optimal;
        as_lp.x = *milp.x;
        as_lp.objective = milp.objective;
        LpSolution milp_sol = to_lp_solution(relax, as_lp, false);
        milp_sol.duals = sol.duals;
        sol = std::move(milp_sol);
        bound = std::max(bound, milp.best_bound);
        break;
      }
    }
  }

  const double node_bound = std::max(node.potential, bound);
  last_x_bar_ = sol.x;

  bool node_point_feasible = false;
  {
    std::vector<double> point = round_integers(problem_, sol.x);
    for (std::size_t j = 0; j < point.size(); ++j) {
      if (!problem_.is_integer(j) || std::abs(point[j] - sol.x[j]) > 1e-6) point[j] = sol.x[j];
    }
    auto candidate = make_incumbent(problem_, std::move(point), IncumbentSource::node_integral);
    node_point_feasible = candidate.has_value();
    offer(std::move(candidate));
  }
  if (config_.nlp_strategy != NlpStrategy::off &&
      nlp_call_due(report_.nodes, config_.nlp_call_base)) {
    run_nlp(sol.x);
  }
  if (node_bound >= report_.ub - kPruneTol) {
    record({node.id, node.depth, kind, "pruned", node.potential, bound});
    return;
  }

  const auto table = rlt_violation_table(relax, sol);
  const std::vector<double> no_duals;
  const auto theta = branch_scores(relax, table, config_.branching_rule, box, root_box_,
                                   sol.duals ? std::span<const double>(*sol.duals)
                                             : std::span<const double>(no_duals));
  const auto choice =
      select_branch_variable(theta, sol.x, problem_, box, config_.integer_mode, milp_node);
  if (!choice) {
    if (!node_point_feasible) floor_ = std::min(floor_, node_bound);
    record({node.id, node.depth, kind, "terminal", node.potential, bound});
    return;
  }

  const std::size_t p = choice->var;
  const double l = box.lower[p];
  const double u = box.upper[p];
  Node left{next_id_++, box, node_bound, node.depth + 1, 0};
  Node right{next_id_++, box, node_bound, node.depth + 1, 0};
  double beta = 0.0;
  if (choice->integrality) {
    beta = sol.x[p];
    left.box.upper[p] = std::floor(beta);
    right.box.lower[p] = std::ceil(beta);
  } else {
    std::optional<double> coord;
    if (report_.incumbent) coord = report_.incumbent->point[p];
    beta = branching_point(sol.x[p], l, u, coord, config_.branch_convex_coeff,
                           config_.min_width_frac);
    if (problem_.is_integer(p)) {
      left.box.upper[p] = std::floor(beta);
      right.box.lower[p] = std::ceil(beta + 1e-9);
    } else {
      left.box.upper[p] = beta;
      right.box.lower[p] = beta;
    }
  }
  push_node(queue_, std::move(left));
  push_node(queue_, std::move(right));
  NodeEvent event{node.id, node.depth, kind, "branched", node.potential, bound};
  event.branch_var = static_cast<int>(p);
  event.beta = beta;
  record(event);
}

SolveReport Solver::finish(SolveStatus status) {
  if (status == SolveStatus::infeasible) {
    report_.lb = kInf;
    report_.ub = kInf;
    report_.incumbent.reset();
  }
  report_.status = status;
  report_.rel_gap = relative_gap(report_.lb, report_.ub);
  report_.abs_gap = std::isfinite(report_.lb) && std::isfinite(report_.ub)
                        ? std::max(0.0, report_.ub - report_.lb)
                        : kInf;
  if (status == SolveStatus::infeasible) report_.rel_gap = report_.abs_gap = 0.0;
  report_.wall_time = elapsed();
  return std::move(report_);
}

SolveReport Solver::run() {
  config_.validate();
  problem_.validate();
  start_ = Clock::now();
  deadline_ = start_ + to_duration(config_.time_limit);

  root_box_ = Box::of(problem_);
  if (!round_integer_bounds(problem_, root_box_)) return finish(SolveStatus::infeasible);
  if (config_.fbbt) {
    FbbtResult tightened = fbbt(problem_, root_box_, config_.fbbt_max_passes);
    if (tightened.infeasible) return finish(SolveStatus::infeasible);
    root_box_ = std::move(tightened.box);
  }
  if (config_.obbt != ObbtSetting::off) {
    const auto t0 = Clock::now();
    ObbtOptions options;
    options.mode = config_.obbt == ObbtSetting::milp ? ObbtMode::milp : ObbtMode::lp;
    options.threads = config_.obbt_threads;
    options.deadline = deadline_ - to_duration(reserve());
    ObbtResult tightened = obbt(problem_, root_box_, options);
    report_.obbt_time = seconds_between(t0, Clock::now());
    if (tightened.infeasible) return finish(SolveStatus::infeasible);
    root_box_ = std::move(tightened.box);
    if (config_.fbbt) {
      FbbtResult again = fbbt(problem_, root_box_, config_.fbbt_max_passes);
      if (again.infeasible) return finish(SolveStatus::infeasible);
      root_box_ = std::move(again.box);
    }
  }

  Node root{1, root_box_, -kInf, 1, 0};
  if (config_.root_lp) {
    const Relaxation relax = build_relaxation(problem_, root_box_, RelaxationMode::continuous);
    LpResult lp = solve_lp(relax.lp, LpOptions{100000, deadline_});
    if (lp.status == LpStatus::infeasible) return finish(SolveStatus::infeasible);
    if (lp.status == LpStatus::optimal) {
      root.potential = lp.objective;
      report_.root_lb = lp.objective;
      root_lp_ = std::move(lp);
    }
  }
  push_node(queue_, std::move(root));

  const std::size_t n = problem_.num_vars();
  while (true) {
    refresh_lb();
    iteration_lbs_.push_back(report_.lb);
    if (gap_closed()) return finish(SolveStatus::optimal);
    if (queue_.empty()) break;

    const bool out_of_nodes = report_.nodes >= config_.node_limit;
    if (config_.minlp_end && !end_call_done_ && !std::isfinite(report_.ub) &&
        (remaining() <= reserve() || out_of_nodes)) {
      end_call_done_ = true;
      std::vector<double> x0 = last_x_bar_;
      if (x0.empty()) {
        for (std::size_t j = 0; j < n; ++j) x0.push_back(0.5 * (root_box_.lower[j] + root_box_.upper[j]));
      }
      run_minlp(x0, reserve(), true);
      continue;
    }
    if (out_of_nodes || remaining() <= 0.0) return finish(SolveStatus::time_limit);

    Node node = select_node(queue_);
    process(std::move(node));

    if (config_.minlp_on_stuck && !last_x_bar_.empty() &&
        stuck(iteration_lbs_, n, config_.stuck_rel_tol, config_.stuck_window)) {
      iteration_lbs_.clear();
      const double budget =
          std::min(config_.minlp_stuck_budget * config_.time_limit, remaining() - reserve());
      if (budget > 0.0) {
        const std::vector<double> x0 = last_x_bar_;
        run_minlp(x0, budget, false);
      }
    }
  }

  // Queue exhausted.
  if (report_.incumbent) {
    return finish(gap_closed() ? SolveStatus::optimal : SolveStatus::time_limit);
  }
  if (std::isinf(floor_)) return finish(SolveStatus::infeasible);
  return finish(SolveStatus::time_limit);
}

}  // namespace

const char* to_string(IntegerMode mode) {
  switch (mode) {
    case IntegerMode::milp_at_depth:
      return "milp";
    case IntegerMode::rlt_first:
      return "rlt-first";
    case IntegerMode::integrality_first:
      return "int-first";
  }
  return "unknown";
}

const char* to_string(BranchingRule rule) {
  switch (rule) {
    case BranchingRule::sum:
      return "sum";
    case BranchingRule::range:
      return "range";
    case BranchingRule::dual:
      return "dual";
  }
  return "unknown";
}

const char* to_string(ObbtSetting setting) {
  switch (setting) {
    case ObbtSetting::lp:
      return "lp";
    case ObbtSetting::milp:
      return "milp";
    case ObbtSetting::off:
      return "off";
  }
  return "unknown";
}

const char* to_string(NlpStrategy strategy) {
  switch (strategy) {
    case NlpStrategy::round:
      return "round";
    case NlpStrategy::fix:
      return "fix";
    case NlpStrategy::round_fix:
      return "round-fix";
    case NlpStrategy::off:
      return "off";
  }
  return "unknown";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::time_limit:
      return "time_limit";
    case SolveStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw UsageError(std::string("invalid solver setting: ") + what);
  };
  require(rel_gap >= 0.0, "rel_gap must be >= 0");
  require(abs_gap >= 0.0, "abs_gap must be >= 0");
  require(time_limit > 0.0, "time_limit must be > 0");
  require(milp_depth >= 1, "milp depth must be >= 1");
  require(branch_convex_coeff >= 0.0 && branch_convex_coeff <= 1.0,
          "branch_convex_coeff must lie in [0, 1]");
  require(min_width_frac >= 0.0 && min_width_frac < 0.5, "min_width_frac must lie in [0, 0.5)");
  require(obbt_threads >= 1, "obbt_threads must be >= 1");
  require(fbbt_max_passes >= 1, "fbbt passes must be >= 1");
  require(nlp_call_base > 1.0, "nlp_call_base must be > 1");
  require(nlp_time_cap > 0.0, "nlp_time_cap must be > 0");
  require(minlp_end_reserve > 0.0 && minlp_end_reserve < 0.5,
          "minlp_end_reserve must lie in (0, 0.5)");
  require(stuck_rel_tol > 0.0, "stuck_rel_tol must be > 0");
  require(node_limit >= 1, "node_limit must be >= 1");
  require(milp_node_limit >= 1, "milp_node_limit must be >= 1");
  require(milp_time_limit > 0.0, "milp_time_limit must be > 0");
}

void push_node(NodeQueue& queue, Node node) {
  const auto key = std::make_pair(node.potential, node.id);
  queue.emplace(key, std::move(node));
}

Node select_node(NodeQueue& queue) {
  auto it = queue.begin();
  Node node = std::move(it->second);
  queue.erase(it);
  return node;
}

void prune(NodeQueue& queue, double ub) {
  if (!std::isfinite(ub)) return;
  auto first = queue.lower_bound({ub - kPruneTol, std::numeric_limits<long>::min()});
  queue.erase(first, queue.end());
}

std::vector<double> branch_scores(const Relaxation& relax, std::span<const Violation> table,
                                  BranchingRule rule, const Box& node_box, const Box& root_box,
                                  std::span<const double> duals) {
  const std::size_t n = relax.num_vars;
  std::vector<double> theta(n, 0.0);
  auto sum_rule = [&] {
    std::fill(theta.begin(), theta.end(), 0.0);
    for (const auto& v : table) theta[static_cast<std::size_t>(v.var)] += v.value;
  };

  switch (rule) {
    case BranchingRule::sum:
      sum_rule();
      return theta;
    case BranchingRule::range:
      for (const auto& v : table) {
        const auto j = static_cast<std::size_t>(v.var);
        const double root_width = root_box.width(j);
        if (root_width > 0.0) theta[j] += node_box.width(j) / root_width * v.value;
      }
      return theta;
    case BranchingRule::dual: {
      bool any_violation = false;
      for (const auto& v : table) any_violation = any_violation || v.value > 0.0;
      if (duals.size() != relax.lp.rows.size()) {
        sum_rule();
        return theta;
      }
      std::vector<double> column_weight(relax.lp.num_cols, 0.0);
      for (std::size_t i = 0; i < relax.lp.rows.size(); ++i) {
        const double w = std::abs(duals[i]);
        if (w == 0.0) continue;
        const auto& coeffs = relax.lp.rows[i].coeffs;
        for (std::size_t c = relax.num_vars; c < coeffs.size(); ++c) {
          if (coeffs[c] != 0.0) column_weight[c] += w;
        }
      }
      bool any_score = false;
      for (const auto& v : table) {
        const auto j = static_cast<std::size_t>(v.var);
        theta[j] += column_weight[v.column] * v.value;
        any_score = any_score || theta[j] > 0.0;
      }
      if (any_violation && !any_score) sum_rule();
      return theta;
    }
  }
  return theta;
}

std::optional<BranchChoice> select_branch_variable(std::span<const double> theta,
                                                   std::span<const double> x_bar,
                                                   const Problem& problem, const Box& node_box,
                                                   IntegerMode mode, bool milp_node) {
  auto by_theta = [&]() -> std::optional<BranchChoice> {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (theta[j] <= kThetaTol || node_box.width(j) <= kMinWidth) continue;
      if (!best || theta[j] > theta[*best]) best = j;
    }
    if (!best) return std::nullopt;
    return BranchChoice{*best, false};
  };
  auto by_fraction = [&]() -> std::optional<BranchChoice> {
    std::optional<std::size_t> best;
    double best_distance = 1e-6;
    for (std::size_t j = 0; j < problem.num_vars(); ++j) {
      if (!problem.is_integer(j)) continue;
      const double d = fractionality(x_bar[j]);
      if (d > best_distance) {
        best_distance = d;
        best = j;
      }
    }
    if (!best) return std::nullopt;
    return BranchChoice{*best, true};
  };

  switch (mode) {
    case IntegerMode::milp_at_depth:
      if (auto c = by_theta()) return c;
      if (!milp_node) return by_fraction();
      return std::nullopt;
    case IntegerMode::rlt_first:
      if (auto c = by_theta()) return c;
      return by_fraction();
    case IntegerMode::integrality_first:
      if (auto c = by_fraction()) return c;
      return by_theta();
  }
  return std::nullopt;
}

double branching_point(double x_bar, double lower, double upper,
                       std::optional<double> incumbent_coord, double convex_coeff,
                       double min_width_frac) {
  double beta = 0.0;
  if (incumbent_coord && *incumbent_coord > lower && *incumbent_coord < upper) {
    beta = *incumbent_coord;
  } else {
    beta = convex_coeff * x_bar + (1.0 - convex_coeff) * 0.5 * (lower + upper);
  }
  const double margin = min_width_frac * (upper - lower);
  return std::clamp(beta, lower + margin, upper - margin);
}

bool nlp_call_due(long nodes_solved, double base) {
  if (!(base > 1.0)) throw UsageError("nlp_call_due: base must be > 1");
  double power = 1.0;
  while (true) {
    const double threshold = std::ceil(power);
    if (threshold == static_cast<double>(nodes_solved)) return true;
    if (threshold > static_cast<double>(nodes_solved)) return false;
    power *= base;
  }
}

int stuck_window(std::size_t num_vars, StuckWindow reading) {
  const double two_n = 2.0 * static_cast<double>(num_vars);
  if (reading == StuckWindow::radical_of_sum) {
    return static_cast<int>(std::ceil(std::sqrt(two_n + 1.0)));
  }
  return static_cast<int>(std::ceil(std::sqrt(two_n))) + 1;
}

bool stuck(std::span<const double> lb_history, std::size_t num_vars, double rel_tol,
           StuckWindow reading) {
  const auto window = static_cast<std::size_t>(stuck_window(num_vars, reading));
  if (lb_history.size() < window + 1) return false;
  for (std::size_t i = lb_history.size() - window; i < lb_history.size(); ++i) {
    const double prev = lb_history[i - 1];
    const double change = std::abs(lb_history[i] - prev) / std::max(1.0, std::abs(prev));
    if (!(change < rel_tol)) return false;
  }
  return true;
}

double relative_gap(double lb, double ub) {
  if (!std::isfinite(lb) || !std::isfinite(ub)) return kInf;
  return std::max(0.0, ub - lb) / std::max(std::abs(ub), 1e-9);
}

SolveReport solve(const Problem& problem, const SolverConfig& config) {
  return Solver(problem, config).run();
}

}  // namespace polyrlt
