#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "polyrlt/lp.hpp"
#include "polyrlt/problem.hpp"

namespace polyrlt {

enum class RelaxationMode { continuous, milp };

// Which problem row a relaxation row came from.
enum class RowOrigin { inequality, equality, bound_factor };

// LP(box): original variables followed by one RLT column per monomial of
// degree 2..delta over all variables, the linearized objective and
// constraints, and every degree-delta bound-factor row.
struct Relaxation {
  LinearProgram lp;
  std::size_t num_vars = 0;
  int degree = 1;
  RltIndex rlt_index;
  // rlt_columns[k] is the monomial of column num_vars + k.
  std::vector<Monomial> rlt_columns;
  std::vector<RowOrigin> row_origin;
  std::size_t first_bound_factor_row = 0;
  std::size_t num_bound_factor_rows = 0;
  RelaxationMode mode = RelaxationMode::continuous;
  // Per original variable; meaningful in milp mode only.
  std::vector<bool> integrality;

  std::size_t num_rlt_columns() const { return rlt_columns.size(); }
  std::vector<std::size_t> integral_columns() const;
  std::vector<std::string> column_names() const;
};

struct LpSolution {
  LpStatus status = LpStatus::stalled;
  std::vector<double> x;
  // Values of the RLT columns, parallel to Relaxation::rlt_columns.
  std::vector<double> rlt_values;
  double objective = 0.0;
  // Present only when solved as a continuous LP.
  std::optional<std::vector<double>> duals;

  // Column value of monomial `m` (|m| >= 1) in this solution.
  double value(const Relaxation& relax, const Monomial& m) const;
};

// Splits a raw LP result over relaxation columns into x and X values.
LpSolution to_lp_solution(const Relaxation& relax, const LpResult& result,
                          bool keep_duals);

// All monomials of degree 2..degree over num_vars variables, by degree then
// lexicographically.
std::vector<Monomial> enumerate_rlt_monomials(std::size_t num_vars, int degree);

// Number of bound-factor rows, C(2n + delta - 1, delta).
std::size_t bound_factor_count(std::size_t num_vars, int degree);

// [prod_{j in lower_factors}(x_j - l_j) * prod_{j in upper_factors}(u_j - x_j)]_L >= 0
// as a row with the constant moved to the right-hand side.
LpRow expand_bound_factor(const Monomial& lower_factors, const Monomial& upper_factors,
                          const Box& box, const RltIndex& rlt_index, std::size_t num_cols);

Relaxation build_relaxation(const Problem& problem, const Box& box, RelaxationMode mode);

// One entry per (variable j, monomial J) with J u {j} an RLT column:
// |X_{J u {j}} - x_j X_J|.
struct Violation {
  int var = 0;
  Monomial rest;
  std::size_t column = 0;  // column of rest * {var}
  double value = 0.0;
};

std::vector<Violation> rlt_violation_table(const Relaxation& relax, const LpSolution& sol);

}  // namespace polyrlt
