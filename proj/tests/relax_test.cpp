#include <gtest/gtest.h>

#include <random>

#include "polyrlt/errors.hpp"
#include "polyrlt/relax.hpp"

namespace polyrlt {
namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Problem problem_of_degree(std::size_t n, int degree) {
  Problem p;
  for (std::size_t j = 0; j < n; ++j) {
    p.variables.push_back({"x" + std::to_string(j), -1.0, 2.0, false});
  }
  p.objective = Polynomial::term(Monomial::power(0, degree), 1.0) + Polynomial::variable(0);
  return p;
}

double row_activity(const LpRow& row, const std::vector<double>& cols) {
  double a = 0.0;
  for (std::size_t j = 0; j < cols.size(); ++j) a += row.coeffs[j] * cols[j];
  return a;
}

TEST(RelaxTest, BoundFactorAndColumnCounts) {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int d : {2, 3}) {
      Problem p = problem_of_degree(n, d);
      Relaxation r = build_relaxation(p, Box::of(p), RelaxationMode::continuous);
      const std::size_t expected_rows = binomial(2 * n + static_cast<std::size_t>(d) - 1,
                                                 static_cast<std::size_t>(d));
      EXPECT_EQ(r.num_bound_factor_rows, expected_rows) << n << " " << d;
      EXPECT_EQ(bound_factor_count(n, d), expected_rows);
      std::size_t expected_cols = 0;
      for (int k = 2; k <= d; ++k) {
        expected_cols += binomial(n + static_cast<std::size_t>(k) - 1, static_cast<std::size_t>(k));
      }
      EXPECT_EQ(r.num_rlt_columns(), expected_cols);
      for (const auto& row : r.lp.rows) EXPECT_EQ(row.coeffs.size(), r.lp.num_cols);
    }
  }
  EXPECT_EQ(bound_factor_count(2, 2), 10u);
}

TEST(RelaxTest, SingleVariableQuadraticRows) {
  Problem p;
  p.variables.push_back({"x", 0.0, 1.0, false});
  p.objective = Polynomial::term(Monomial{0, 0}, 1.0);
  Relaxation r = build_relaxation(p, Box::of(p), RelaxationMode::continuous);
  ASSERT_EQ(r.num_bound_factor_rows, 3u);
  ASSERT_EQ(r.lp.num_cols, 2u);
  // x^2 >= 0, x(1 - x) >= 0, (1 - x)^2 >= 0 in lexicographic factor order.
  const auto& rows = r.lp.rows;
  EXPECT_EQ(rows[0].coeffs, (std::vector<double>{0.0, 1.0}));
  EXPECT_DOUBLE_EQ(rows[0].rhs, 0.0);
  EXPECT_EQ(rows[1].coeffs, (std::vector<double>{1.0, -1.0}));
  EXPECT_DOUBLE_EQ(rows[1].rhs, 0.0);
  EXPECT_EQ(rows[2].coeffs, (std::vector<double>{-2.0, 1.0}));
  EXPECT_DOUBLE_EQ(rows[2].rhs, -1.0);
  EXPECT_DOUBLE_EQ(r.lp.col_lower[1], 0.0);
  EXPECT_DOUBLE_EQ(r.lp.col_upper[1], 1.0);
}

TEST(RelaxTest, LinearProblemHasNoRltPart) {
  Problem p;
  p.variables.push_back({"x", 0.0, 1.0, false});
  p.variables.push_back({"y", 0.0, 1.0, true});
  p.objective = Polynomial::variable(0) + Polynomial::variable(1);
  p.inequalities.push_back({"c", Polynomial::variable(0) - Polynomial::variable(1), -0.5});
  Relaxation r = build_relaxation(p, Box::of(p), RelaxationMode::milp);
  EXPECT_EQ(r.num_rlt_columns(), 0u);
  EXPECT_EQ(r.num_bound_factor_rows, 0u);
  EXPECT_EQ(r.lp.rows.size(), 1u);
  EXPECT_EQ(r.integral_columns(), (std::vector<std::size_t>{1}));
  Relaxation c = build_relaxation(p, Box::of(p), RelaxationMode::continuous);
  EXPECT_TRUE(c.integral_columns().empty());
}

TEST(RelaxTest, DegenerateBoxIsUsageError) {
  Problem p = problem_of_degree(2, 2);
  Box box = Box::of(p);
  box.lower[1] = 3.0;
  EXPECT_THROW(build_relaxation(p, box, RelaxationMode::continuous), UsageError);
}

TEST(RelaxTest, ExpandBoundFactorExamples) {
  Problem p = problem_of_degree(2, 2);
  Relaxation r = build_relaxation(p, Box::of(p), RelaxationMode::continuous);
  const int x12 = r.rlt_index.at(Monomial{0, 1});
  const int x11 = r.rlt_index.at(Monomial{0, 0});

  Box zero{{0.0, 0.0}, {1.0, 1.0}};
  LpRow a = expand_bound_factor(Monomial{0, 1}, Monomial(), zero, r.rlt_index, r.lp.num_cols);
  std::vector<double> expect_a(r.lp.num_cols, 0.0);
  expect_a[static_cast<std::size_t>(x12)] = 1.0;
  EXPECT_EQ(a.coeffs, expect_a);
  EXPECT_DOUBLE_EQ(a.rhs, 0.0);

  LpRow b = expand_bound_factor(Monomial{0}, Monomial{1}, zero, r.rlt_index, r.lp.num_cols);
  std::vector<double> expect_b(r.lp.num_cols, 0.0);
  expect_b[0] = 1.0;
  expect_b[static_cast<std::size_t>(x12)] = -1.0;
  EXPECT_EQ(b.coeffs, expect_b);
  EXPECT_DOUBLE_EQ(b.rhs, 0.0);

  Box wide{{0.0, 0.0}, {2.0, 1.0}};
  LpRow c = expand_bound_factor(Monomial(), Monomial{0, 0}, wide, r.rlt_index, r.lp.num_cols);
  std::vector<double> expect_c(r.lp.num_cols, 0.0);
  expect_c[0] = -4.0;
  expect_c[static_cast<std::size_t>(x11)] = 1.0;
  EXPECT_EQ(c.coeffs, expect_c);
  EXPECT_DOUBLE_EQ(c.rhs, -4.0);
  EXPECT_EQ(c.relation, Relation::greater_equal);
}

LpSolution bilinear_solution(double x1, double x2, double x11, double x12, double x22) {
  LpSolution s;
  s.status = LpStatus::optimal;
  s.x = {x1, x2};
  s.rlt_values = {x11, x12, x22};
  return s;
}

double entry(const std::vector<Violation>& table, int var, const Monomial& rest) {
  for (const auto& v : table) {
    if (v.var == var && v.rest == rest) return v.value;
  }
  ADD_FAILURE() << "missing entry";
  return -1.0;
}

TEST(RelaxTest, ViolationTableExamples) {
  Problem p = problem_of_degree(2, 2);
  Relaxation r = build_relaxation(p, Box::of(p), RelaxationMode::continuous);
  // One entry per variable occurrence in each column: X11 -> 1, X12 -> 2, X22 -> 1.
  auto exact = rlt_violation_table(r, bilinear_solution(0.5, 0.5, 0.25, 0.25, 0.25));
  EXPECT_EQ(exact.size(), 4u);
  EXPECT_DOUBLE_EQ(entry(exact, 0, Monomial{1}), 0.0);
  EXPECT_DOUBLE_EQ(entry(exact, 1, Monomial{0}), 0.0);

  auto off = rlt_violation_table(r, bilinear_solution(0.5, 0.5, 0.25, 0.5, 0.25));
  EXPECT_DOUBLE_EQ(entry(off, 0, Monomial{1}), 0.25);
  EXPECT_DOUBLE_EQ(entry(off, 1, Monomial{0}), 0.25);

  auto square = rlt_violation_table(r, bilinear_solution(1.0, 1.0, 0.2, 1.0, 1.0));
  EXPECT_DOUBLE_EQ(entry(square, 0, Monomial{0}), 0.8);

  LpSolution bad;
  bad.status = LpStatus::infeasible;
  EXPECT_THROW(rlt_violation_table(r, bad), UsageError);
}

TEST(RelaxTest, DegreeThreeViolationEntries) {
  Problem p = problem_of_degree(2, 3);
  Relaxation r = build_relaxation(p, Box::of(p), RelaxationMode::continuous);
  LpSolution s;
  s.status = LpStatus::optimal;
  s.x = {2.0, 3.0};
  for (const auto& m : r.rlt_columns) s.rlt_values.push_back(m.eval(s.x));
  const int x112 = r.rlt_index.at(Monomial{0, 0, 1}) - 2;
  s.rlt_values[static_cast<std::size_t>(x112)] = 10.0;
  auto table = rlt_violation_table(r, s);
  EXPECT_DOUBLE_EQ(entry(table, 0, Monomial{0, 1}), std::abs(10.0 - 2.0 * 6.0));
  EXPECT_DOUBLE_EQ(entry(table, 1, Monomial{0, 0}), std::abs(10.0 - 3.0 * 4.0));
}

// Lifting any box point with X_J = prod x_j satisfies every bound-factor row,
// and linearized constraints reproduce the polynomial values.
TEST(RelaxTest, LiftedPointsAreFeasible) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    Problem p;
    for (int j = 0; j < 3; ++j) {
      const double lo = -2.0 + 2.0 * unit(rng);
      p.variables.push_back({"x" + std::to_string(j), lo, lo + 0.5 + 2.0 * unit(rng), false});
    }
    Polynomial body;
    for (int t = 0; t < 4; ++t) {
      std::vector<int> idx;
      const int deg = 1 + trial % 3;
      for (int k = 0; k < deg; ++k) idx.push_back(pick(rng));
      body.add_term(Monomial(idx), unit(rng) * 4 - 2);
    }
    p.objective = body;
    p.inequalities.push_back({"c", body, -1.0});
    Box box = Box::of(p);
    Relaxation r = build_relaxation(p, box, RelaxationMode::continuous);
    for (int s = 0; s < 25; ++s) {
      std::vector<double> x;
      for (int j = 0; j < 3; ++j) x.push_back(box.lower[j] + box.width(j) * unit(rng));
      std::vector<double> cols = x;
      for (const auto& m : r.rlt_columns) cols.push_back(m.eval(x));
      for (std::size_t i = r.first_bound_factor_row; i < r.lp.rows.size(); ++i) {
        EXPECT_GE(row_activity(r.lp.rows[i], cols) - r.lp.rows[i].rhs, -1e-9);
      }
      for (std::size_t j = 0; j < cols.size(); ++j) {
        EXPECT_GE(cols[j], r.lp.col_lower[j] - 1e-9);
        EXPECT_LE(cols[j], r.lp.col_upper[j] + 1e-9);
      }
      const double linear = row_activity(r.lp.rows[0], cols) - r.lp.rows[0].rhs;
      EXPECT_NEAR(linear, body.eval(x) + 1.0, 1e-9);
    }
  }
}

TEST(RelaxTest, LpFormatDumpNamesColumns) {
  Problem p = problem_of_degree(2, 2);
  Relaxation r = build_relaxation(p, Box::of(p), RelaxationMode::continuous);
  const auto names = r.column_names();
  EXPECT_EQ(names.front(), "x0");
  EXPECT_EQ(names.back(), "X_1_1");
  const std::string text = r.lp.to_lp_format(names);
  EXPECT_NE(text.find("X_0_1"), std::string::npos);
}

}  // namespace
}  // namespace polyrlt
