#pragma once

#include <optional>
#include <span>
#include <vector>

#include "polyrlt/lp.hpp"
#include "polyrlt/problem.hpp"

namespace polyrlt {

enum class IncumbentSource { node_integral, nlp_round, nlp_fix, minlp_ls };

const char* to_string(IncumbentSource source);

struct Incumbent {
  std::vector<double> point;
  double value = 0.0;  // internal (minimization) objective
  IncumbentSource source = IncumbentSource::node_integral;
};

// Incumbent at `point` if it passes check_feasible; nullopt otherwise.
std::optional<Incumbent> make_incumbent(const Problem& problem, std::vector<double> point,
                                        IncumbentSource source);

struct NlpResult {
  bool success = false;
  std::vector<double> x;
  double objective = 0.0;
  double violation = 0.0;
  double projected_gradient = 0.0;
  int outer_iterations = 0;
};

// Continuous local solve of `problem` over `box`, ignoring integrality.
// Augmented Lagrangian outer loop around a spectral projected-gradient inner
// solver with Armijo backtracking. Success needs constraint violation <= 1e-6
// and a projected gradient of the augmented objective <= 1e-5.
NlpResult nlp_local_solve(const Problem& problem, const Box& box, std::span<const double> x0,
                          double budget_seconds);

// Half-up rounding floor(v + 0.5) of the integer coordinates.
std::vector<double> round_integers(const Problem& problem, std::span<const double> x);

// Box with the integer variables fixed at `x`'s (rounded) values. nullopt when
// a rounded value falls outside the variable's bounds.
std::optional<Box> fixed_integer_box(const Problem& problem, const Box& box,
                                     std::span<const double> x);

std::optional<Incumbent> try_round(const Problem& problem, std::span<const double> x_bar,
                                   double budget_seconds);
std::optional<Incumbent> try_fix(const Problem& problem, std::span<const double> x_bar,
                                 double budget_seconds);
// Better of try_round and try_fix.
std::optional<Incumbent> try_round_plus_fix(const Problem& problem,
                                            std::span<const double> x_bar,
                                            double budget_seconds);

// round+fix from x0, then a +-1 neighborhood descent over the integer
// variables (index order, first improvement) until no move improves or the
// budget runs out.
std::optional<Incumbent> minlp_local_solve(const Problem& problem, std::span<const double> x0,
                                           double budget_seconds);

}  // namespace polyrlt
