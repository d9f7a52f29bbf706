#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "polyrlt/poly.hpp"

namespace polyrlt {

inline constexpr double kDefaultFeasibilityTol = 1e-6;

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  bool integer = false;

  friend bool operator==(const Variable&, const Variable&) = default;
};

// body >= rhs (inequalities) or body == rhs (equalities).
struct Constraint {
  std::string name;
  Polynomial body;
  double rhs = 0.0;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

enum class Sense { minimize, maximize };

// Mixed-integer polynomial program in normalized form: minimize `objective`
// subject to `inequalities` (>=) and `equalities` over a finite box. A
// maximization input is stored negated with sense = maximize so results can be
// reported in the user's sense.
struct Problem {
  std::string name;
  std::vector<Variable> variables;
  Polynomial objective;
  Sense sense = Sense::minimize;
  std::vector<Constraint> inequalities;
  std::vector<Constraint> equalities;

  std::size_t num_vars() const { return variables.size(); }
  bool is_integer(std::size_t j) const { return variables[j].integer; }
  bool has_integers() const;
  std::vector<std::string> variable_names() const;

  // Throws UsageError on non-finite or crossed bounds and on references to
  // undeclared variables. Integer variables whose bounds contain no integer are
  // accepted; the solver reports them as infeasible.
  void validate() const;

  // Objective value in the user's sense.
  double external_objective(double internal) const {
    return sense == Sense::maximize ? -internal : internal;
  }

  friend bool operator==(const Problem&, const Problem&) = default;
};

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box of(const Problem& problem);

  std::size_t size() const { return lower.size(); }
  double width(std::size_t j) const { return upper[j] - lower[j]; }
  bool contains(std::span<const double> point, double tol = 0.0) const;
  bool contains(const Box& inner, double tol = 0.0) const;

  // Throws UsageError when sizes differ from `n` or some lower > upper.
  void validate(std::size_t n) const;

  friend bool operator==(const Box&, const Box&) = default;
};

// Max degree over the objective and all constraints, at least 1.
int problem_degree(const Problem& problem);

// Objective value at `point` in the internal (minimize) sense.
double eval_objective(const Problem& problem, std::span<const double> point);

// Largest violation of bounds, constraints and integrality at `point`.
double max_violation(const Problem& problem, std::span<const double> point);

bool check_feasible(const Problem& problem, std::span<const double> point,
                    double tol = kDefaultFeasibilityTol);

// Maps a monomial of degree >= 2 to its relaxation column.
using RltIndex = std::map<Monomial, int>;

// A linear function over relaxation columns: coeffs . columns + constant.
struct LinearRow {
  std::vector<double> coeffs;
  double constant = 0.0;
};

// Replaces each monomial of degree >= 2 with its RLT column; degree-1 terms
// land on the original variable columns. Throws InternalError when a monomial
// is missing from `rlt_index`.
LinearRow linearize(const Polynomial& poly, const RltIndex& rlt_index,
                    std::size_t num_cols);

}  // namespace polyrlt
