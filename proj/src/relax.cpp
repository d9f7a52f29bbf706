#include "polyrlt/relax.hpp"

#include <cmath>

#include "polyrlt/errors.hpp"
#include "polyrlt/interval.hpp"

namespace polyrlt {
namespace {

// Calls visit(seq) for every nondecreasing sequence of `length` values drawn
// from [0, alphabet), in lexicographic order.
template <typename Visit>
void for_each_multiset(int alphabet, int length, Visit&& visit) {
  if (length == 0 || alphabet == 0) return;
  std::vector<int> seq(static_cast<std::size_t>(length), 0);
  while (true) {
    visit(seq);
    int pos = length - 1;
    while (pos >= 0 && seq[static_cast<std::size_t>(pos)] == alphabet - 1) --pos;
    if (pos < 0) return;
    const int next = seq[static_cast<std::size_t>(pos)] + 1;
    for (int k = pos; k < length; ++k) seq[static_cast<std::size_t>(k)] = next;
  }
}

}  // namespace

std::vector<std::size_t> Relaxation::integral_columns() const {
  std::vector<std::size_t> cols;
  if (mode != RelaxationMode::milp) return cols;
  for (std::size_t j = 0; j < integrality.size(); ++j) {
    if (integrality[j]) cols.push_back(j);
  }
  return cols;
}

std::vector<std::string> Relaxation::column_names() const {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < num_vars; ++j) names.push_back("x" + std::to_string(j));
  for (const auto& m : rlt_columns) {
    std::string name = "X";
    for (int i : m.indices()) name += "_" + std::to_string(i);
    names.push_back(name);
  }
  return names;
}

double LpSolution::value(const Relaxation& relax, const Monomial& m) const {
  if (m.degree() == 1) return x[static_cast<std::size_t>(m.indices().front())];
  auto it = relax.rlt_index.find(m);
  if (it == relax.rlt_index.end()) {
    throw InternalError("no RLT column for " + m.to_string());
  }
  return rlt_values[static_cast<std::size_t>(it->second) - relax.num_vars];
}

LpSolution to_lp_solution(const Relaxation& relax, const LpResult& result, bool keep_duals) {
  LpSolution sol;
  sol.status = result.status;
  sol.objective = result.objective;
  if (result.status != LpStatus::optimal) return sol;
  sol.x.assign(result.x.begin(), result.x.begin() + static_cast<long>(relax.num_vars));
  sol.rlt_values.assign(result.x.begin() + static_cast<long>(relax.num_vars), result.x.end());
  if (keep_duals) sol.duals = result.duals;
  return sol;
}

std::vector<Monomial> enumerate_rlt_monomials(std::size_t num_vars, int degree) {
  std::vector<Monomial> monomials;
  for (int k = 2; k <= degree; ++k) {
    for_each_multiset(static_cast<int>(num_vars), k,
                      [&](const std::vector<int>& seq) { monomials.emplace_back(seq); });
  }
  return monomials;
}

std::size_t bound_factor_count(std::size_t num_vars, int degree) {
  // C(2n + d - 1, d) computed incrementally; exact for desk-scale sizes.
  const std::size_t top = 2 * num_vars + static_cast<std::size_t>(degree) - 1;
  std::size_t result = 1;
  for (std::size_t k = 1; k <= static_cast<std::size_t>(degree); ++k) {
    result = result * (top - static_cast<std::size_t>(degree) + k) / k;
  }
  return result;
}

LpRow expand_bound_factor(const Monomial& lower_factors, const Monomial& upper_factors,
                          const Box& box, const RltIndex& rlt_index, std::size_t num_cols) {
  Polynomial product(1.0);
  for (int j : lower_factors.indices()) {
    product = product * (Polynomial::variable(j) - Polynomial(box.lower[static_cast<std::size_t>(j)]));
  }
  for (int j : upper_factors.indices()) {
    product = product * (Polynomial(box.upper[static_cast<std::size_t>(j)]) - Polynomial::variable(j));
  }
  LinearRow lin = linearize(product, rlt_index, num_cols);
  return LpRow{std::move(lin.coeffs), Relation::greater_equal, -lin.constant};
}

Relaxation build_relaxation(const Problem& problem, const Box& box, RelaxationMode mode) {
  const std::size_t n = problem.num_vars();
  box.validate(n);

  Relaxation relax;
  relax.num_vars = n;
  relax.degree = problem_degree(problem);
  relax.mode = mode;
  relax.integrality.resize(n);
  for (std::size_t j = 0; j < n; ++j) relax.integrality[j] = problem.is_integer(j);

  if (relax.degree >= 2) relax.rlt_columns = enumerate_rlt_monomials(n, relax.degree);
  const std::size_t num_cols = n + relax.rlt_columns.size();
  for (std::size_t k = 0; k < relax.rlt_columns.size(); ++k) {
    relax.rlt_index.emplace(relax.rlt_columns[k], static_cast<int>(n + k));
  }

  LinearProgram& lp = relax.lp;
  lp.num_cols = num_cols;
  lp.col_lower = box.lower;
  lp.col_upper = box.upper;
  for (const auto& m : relax.rlt_columns) {
    const Interval range = eval_interval(m, box.lower, box.upper);
    lp.col_lower.push_back(range.lo);
    lp.col_upper.push_back(range.hi);
  }

  LinearRow objective = linearize(problem.objective, relax.rlt_index, num_cols);
  lp.objective = std::move(objective.coeffs);
  lp.objective_constant = objective.constant;

  for (const auto& c : problem.inequalities) {
    LinearRow row = linearize(c.body, relax.rlt_index, num_cols);
    lp.rows.push_back({std::move(row.coeffs), Relation::greater_equal, c.rhs - row.constant});
    relax.row_origin.push_back(RowOrigin::inequality);
  }
  for (const auto& c : problem.equalities) {
    LinearRow row = linearize(c.body, relax.rlt_index, num_cols);
    lp.rows.push_back({std::move(row.coeffs), Relation::equal, c.rhs - row.constant});
    relax.row_origin.push_back(RowOrigin::equality);
  }

  relax.first_bound_factor_row = lp.rows.size();
  if (relax.degree >= 2) {
    const int types = static_cast<int>(2 * n);
    for_each_multiset(types, relax.degree, [&](const std::vector<int>& seq) {
      std::vector<int> lower_factors;
      std::vector<int> upper_factors;
      for (int t : seq) {
        if (t < static_cast<int>(n)) {
          lower_factors.push_back(t);
        } else {
          upper_factors.push_back(t - static_cast<int>(n));
        }
      }
      lp.rows.push_back(expand_bound_factor(Monomial(lower_factors), Monomial(upper_factors),
                                            box, relax.rlt_index, num_cols));
      relax.row_origin.push_back(RowOrigin::bound_factor);
    });
  }
  relax.num_bound_factor_rows = lp.rows.size() - relax.first_bound_factor_row;
  return relax;
}

std::vector<Violation> rlt_violation_table(const Relaxation& relax, const LpSolution& sol) {
  if (sol.status != LpStatus::optimal) {
    throw UsageError("rlt_violation_table requires an optimal solution");
  }
  std::vector<Violation> table;
  for (std::size_t k = 0; k < relax.rlt_columns.size(); ++k) {
    const Monomial& column = relax.rlt_columns[k];
    const double column_value = sol.rlt_values[k];
    for (int var : column.variables()) {
      Monomial rest = column.without_one(var);
      const double product = sol.x[static_cast<std::size_t>(var)] * sol.value(relax, rest);
      table.push_back({var, std::move(rest), relax.num_vars + k, std::abs(column_value - product)});
    }
  }
  return table;
}

}  // namespace polyrlt
