#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polyrlt/local_search.hpp"
#include "polyrlt/problem.hpp"
#include "polyrlt/relax.hpp"

namespace polyrlt {

enum class IntegerMode { milp_at_depth, rlt_first, integrality_first };
enum class BranchingRule { sum, range, dual };
enum class ObbtSetting { lp, milp, off };
enum class NlpStrategy { round, fix, round_fix, off };
// How the stuck window reads sqrt(2N)+1: ceil(sqrt(2N)) + 1, or ceil(sqrt(2N + 1)).
enum class StuckWindow { radical_plus_one, radical_of_sum };
enum class SolveStatus { optimal, time_limit, infeasible };

const char* to_string(IntegerMode mode);
const char* to_string(BranchingRule rule);
const char* to_string(ObbtSetting setting);
const char* to_string(NlpStrategy strategy);
const char* to_string(SolveStatus status);

struct SolverConfig {
  double rel_gap = 0.001;
  double abs_gap = 0.001;
  double time_limit = 3600.0;
  IntegerMode integer_mode = IntegerMode::milp_at_depth;
  int milp_depth = 1;
  BranchingRule branching_rule = BranchingRule::dual;
  double branch_convex_coeff = 0.75;
  double min_width_frac = 0.01;
  ObbtSetting obbt = ObbtSetting::lp;
  int obbt_threads = 4;
  bool fbbt = true;
  int fbbt_max_passes = 20;
  NlpStrategy nlp_strategy = NlpStrategy::round_fix;
  double nlp_call_base = 1.5;
  double nlp_time_cap = 2.0;
  bool minlp_end = true;
  double minlp_end_reserve = 0.05;
  bool minlp_on_stuck = true;
  double stuck_rel_tol = 0.001;
  StuckWindow stuck_window = StuckWindow::radical_plus_one;
  // Budget of one stuck-triggered MINLP call, as a fraction of time_limit.
  double minlp_stuck_budget = 0.05;
  // Solve the continuous root LP before anything else.
  bool root_lp = true;
  long node_limit = std::numeric_limits<long>::max();
  long milp_node_limit = 100000;
  double milp_time_limit = std::numeric_limits<double>::infinity();

  // Throws UsageError on out-of-range values.
  void validate() const;
};

struct Node {
  long id = 1;
  Box box;
  double potential = -std::numeric_limits<double>::infinity();
  int depth = 1;
  // MILP relaxations of this node that ran out of budget so far.
  int milp_attempts = 0;
};

// Open nodes ordered by (potential, id).
using NodeQueue = std::map<std::pair<double, long>, Node>;

void push_node(NodeQueue& queue, Node node);
// Removes and returns the node of least potential, oldest first on ties.
// Precondition: queue nonempty.
Node select_node(NodeQueue& queue);
// Drops every node with potential >= ub - 1e-9.
void prune(NodeQueue& queue, double ub);

// theta_j = sum_J w(j, J) * violation(j, J). `duals` is needed only by the
// dual rule; when those weights vanish on a nonzero table, sum is used.
std::vector<double> branch_scores(const Relaxation& relax, std::span<const Violation> table,
                                  BranchingRule rule, const Box& node_box, const Box& root_box,
                                  std::span<const double> duals);

struct BranchChoice {
  std::size_t var = 0;
  // Split on integrality (at x_bar) rather than on an RLT violation.
  bool integrality = false;
};

// nullopt when nothing is left to branch on.
std::optional<BranchChoice> select_branch_variable(std::span<const double> theta,
                                                   std::span<const double> x_bar,
                                                   const Problem& problem, const Box& node_box,
                                                   IntegerMode mode, bool milp_node);

double branching_point(double x_bar, double lower, double upper,
                       std::optional<double> incumbent_coord, double convex_coeff,
                       double min_width_frac);

bool nlp_call_due(long nodes_solved, double base);

int stuck_window(std::size_t num_vars, StuckWindow reading = StuckWindow::radical_plus_one);
bool stuck(std::span<const double> lb_history, std::size_t num_vars, double rel_tol,
           StuckWindow reading = StuckWindow::radical_plus_one);

struct NodeEvent {
  long id = 0;
  int depth = 0;
  std::string kind;     // lp or milp
  std::string outcome;  // infeasible, pruned, branched, terminal, requeued, failed
  double potential = 0.0;
  double bound = 0.0;   // node relaxation value, NaN if none
  double lb = 0.0;      // global bounds after the node
  double ub = 0.0;
  int branch_var = -1;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double time = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::time_limit;
  // Internal (minimization) bounds.
  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();
  double rel_gap = std::numeric_limits<double>::infinity();
  double abs_gap = std::numeric_limits<double>::infinity();
  std::optional<Incumbent> incumbent;
  long nodes = 0;
  double root_lb = -std::numeric_limits<double>::infinity();
  double wall_time = 0.0;
  double obbt_time = 0.0;
  double nlp_ls_time = 0.0;
  double minlp_ls_time = 0.0;
  int minlp_end_calls = 0;
  int minlp_stuck_calls = 0;
  std::vector<std::pair<double, double>> lb_history;  // (time, lb)
  std::vector<std::pair<double, double>> ub_history;  // (time, ub)
  std::vector<NodeEvent> events;
};

double relative_gap(double lb, double ub);

SolveReport solve(const Problem& problem, const SolverConfig& config = {});

}  // namespace polyrlt
