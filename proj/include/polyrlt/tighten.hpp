#pragma once

#include <optional>

#include "polyrlt/lp.hpp"
#include "polyrlt/problem.hpp"

namespace polyrlt {

struct FbbtResult {
  Box box;
  bool infeasible = false;
  int passes = 0;
};

// Interval propagation through the original constraints. Each pass isolates
// one monomial at a time against the enclosure of the rest of its row, then
// rounds integer bounds inward. Stops once a pass moves no bound by more than
// 1e-6, or after max_passes (>= 1, else UsageError).
FbbtResult fbbt(const Problem& problem, const Box& box, int max_passes = 20);

// Inward rounding ceil(l - 1e-6), floor(u + 1e-6) of integer bounds. Returns
// false when some integer range becomes empty.
bool round_integer_bounds(const Problem& problem, Box& box);

enum class ObbtMode { lp, milp };

struct ObbtOptions {
  ObbtMode mode = ObbtMode::lp;
  // Per subproblem; defaults follow the mode (5 s lp, 10 s milp) when unset.
  std::optional<double> budget_seconds;
  int threads = 1;
  double milp_gap_tol = 1e-6;
  std::optional<Clock::time_point> deadline;
};

struct ObbtResult {
  Box box;
  bool infeasible = false;
  int solved = 0;
  int stalled = 0;
};

// min / max of every x_j over the RLT relaxation of `box`. A stalled
// direction leaves its bound alone; in milp mode only proven bounds are used.
ObbtResult obbt(const Problem& problem, const Box& box, const ObbtOptions& options = {});

}  // namespace polyrlt
