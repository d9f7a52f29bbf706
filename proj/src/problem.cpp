#include "polyrlt/problem.hpp"

#include <algorithm>
#include <cmath>

#include "polyrlt/errors.hpp"

namespace polyrlt {

bool Problem::has_integers() const {
  return std::any_of(variables.begin(), variables.end(),
                     [](const Variable& v) { return v.integer; });
}

std::vector<std::string> Problem::variable_names() const {
  std::vector<std::string> names;
  names.reserve(variables.size());
  for (const auto& v : variables) names.push_back(v.name);
  return names;
}

void Problem::validate() const {
  for (const auto& v : variables) {
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      throw UsageError("variable " + v.name + " has a non-finite bound");
    }
    if (v.lower > v.upper) {
      throw UsageError("variable " + v.name + " has lower bound above upper bound");
    }
  }
  const int n = static_cast<int>(variables.size());
  auto check = [n](const Polynomial& p, const std::string& what) {
    if (p.max_index() >= n) {
      throw UsageError(what + " references an undeclared variable");
    }
  };
  check(objective, "objective");
  for (const auto& c : inequalities) check(c.body, "constraint " + c.name);
  for (const auto& c : equalities) check(c.body, "constraint " + c.name);
}

Box Box::of(const Problem& problem) {
  Box box;
  for (const auto& v : problem.variables) {
    box.lower.push_back(v.lower);
    box.upper.push_back(v.upper);
  }
  return box;
}

bool Box::contains(std::span<const double> point, double tol) const {
  if (point.size() != lower.size()) return false;
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (point[j] < lower[j] - tol || point[j] > upper[j] + tol) return false;
  }
  return true;
}

bool Box::contains(const Box& inner, double tol) const {
  if (inner.size() != size()) return false;
  for (std::size_t j = 0; j < size(); ++j) {
    if (inner.lower[j] < lower[j] - tol || inner.upper[j] > upper[j] + tol) {
      return false;
    }
  }
  return true;
}

void Box::validate(std::size_t n) const {
  if (lower.size() != n || upper.size() != n) {
    throw UsageError("box dimension " + std::to_string(lower.size()) +
                     " does not match problem dimension " + std::to_string(n));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(lower[j] <= upper[j])) {
      throw UsageError("degenerate box: lower > upper for variable " +
                       std::to_string(j));
    }
  }
}

int problem_degree(const Problem& problem) {
  int degree = std::max(1, problem.objective.degree());
  for (const auto& c : problem.inequalities) degree = std::max(degree, c.body.degree());
  for (const auto& c : problem.equalities) degree = std::max(degree, c.body.degree());
  return degree;
}

double eval_objective(const Problem& problem, std::span<const double> point) {
  if (point.size() != problem.num_vars()) {
    throw UsageError("point dimension does not match problem");
  }
  return problem.objective.eval(point);
}

double max_violation(const Problem& problem, std::span<const double> point) {
  if (point.size() != problem.num_vars()) {
    throw UsageError("point dimension does not match problem");
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < point.size(); ++j) {
    const auto& v = problem.variables[j];
    worst = std::max({worst, v.lower - point[j], point[j] - v.upper});
    if (v.integer) worst = std::max(worst, std::abs(point[j] - std::round(point[j])));
  }
  for (const auto& c : problem.inequalities) {
    worst = std::max(worst, c.rhs - c.body.eval(point));
  }
  for (const auto& c : problem.equalities) {
    worst = std::max(worst, std::abs(c.body.eval(point) - c.rhs));
  }
  return std::isnan(worst) ? INFINITY : worst;
}

bool check_feasible(const Problem& problem, std::span<const double> point, double tol) {
  return max_violation(problem, point) <= tol;
}

LinearRow linearize(const Polynomial& poly, const RltIndex& rlt_index,
                    std::size_t num_cols) {
  LinearRow row;
  row.coeffs.assign(num_cols, 0.0);
  row.constant = poly.constant();
  for (const auto& [m, c] : poly.terms()) {
    std::size_t col = 0;
    if (m.degree() == 1) {
      col = static_cast<std::size_t>(m.indices().front());
    } else {
      auto it = rlt_index.find(m);
      if (it == rlt_index.end()) {
        throw InternalError("monomial " + m.to_string() + " has no RLT column");
      }
      col = static_cast<std::size_t>(it->second);
    }
    if (col >= num_cols) throw InternalError("linearize: column out of range");
    row.coeffs[col] += c;
  }
  return row;
}

}  // namespace polyrlt
