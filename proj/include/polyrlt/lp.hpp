#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace polyrlt {

using Clock = std::chrono::steady_clock;

enum class Relation { greater_equal, equal };

struct LpRow {
  std::vector<double> coeffs;
  Relation relation = Relation::greater_equal;
  double rhs = 0.0;
};

// minimize objective . x + objective_constant
// s.t.     rows, col_lower <= x <= col_upper   (bounds may be infinite)
struct LinearProgram {
  std::size_t num_cols = 0;
  std::vector<double> objective;
  double objective_constant = 0.0;
  std::vector<LpRow> rows;
  std::vector<double> col_lower;
  std::vector<double> col_upper;

  // Throws UsageError on inconsistent lengths or NaN data.
  void validate() const;

  // Standard LP text format, columns named by `col_names`.
  std::string to_lp_format(const std::vector<std::string>& col_names) const;
};

enum class LpStatus { optimal, infeasible, unbounded, stalled };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::stalled;
  std::vector<double> x;
  double objective = 0.0;
  // Row multipliers; >= 0 on >= rows at optimality.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  int iterations = 0;
};

struct LpOptions {
  int iteration_limit = 100000;
  std::optional<Clock::time_point> deadline;
};

// Bounded-variable two-phase primal simplex on a dense tableau. Exceeding the
// iteration limit or the deadline yields LpStatus::stalled.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options);

inline LpResult solve_lp(const LinearProgram& lp, int iteration_limit) {
  return solve_lp(lp, LpOptions{iteration_limit, std::nullopt});
}

}  // namespace polyrlt
