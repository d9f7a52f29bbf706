#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "polyrlt/lp.hpp"

namespace polyrlt {

enum class MilpStatus { optimal, infeasible, bound_only, failed };

const char* to_string(MilpStatus status);

struct MilpBudget {
  double time_seconds = 60.0;
  long node_limit = 100000;
};

struct MilpResult {
  MilpStatus status = MilpStatus::failed;
  // Best integral solution, when one was found.
  std::optional<std::vector<double>> x;
  double objective = kNoValue;
  // Valid lower bound; -inf only when the root LP could not be solved.
  double best_bound = -kNoValue;
  long nodes_used = 0;

  static constexpr double kNoValue = std::numeric_limits<double>::infinity();
};

// Column farthest from an integer among `integral_columns`; ties go to the
// lowest index. nullopt when every distance is <= 1e-6.
std::optional<std::size_t> most_fractional(std::span<const double> x,
                                           std::span<const std::size_t> integral_columns);

// Best-first branch and bound over solve_lp with most-fractional branching.
// `root` may carry an already solved root LP for the same program.
MilpResult solve_milp(const LinearProgram& lp, std::span<const std::size_t> integral_columns,
                      const MilpBudget& budget, double gap_tol,
                      const LpResult* root = nullptr);

}  // namespace polyrlt
