#pragma once

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "polyrlt/lp.hpp"

namespace polyrlt::test {

struct LpCertificate {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double max_row_violation = 0.0;
  double max_bound_violation = 0.0;
  double max_dual_sign_violation = 0.0;
};

// Evaluates primal feasibility and the Lagrangian dual objective of an optimal
// result directly from the LP data.
inline LpCertificate certify(const LinearProgram& lp, const LpResult& r) {
  LpCertificate cert;
  cert.primal_objective = lp.objective_constant;
  for (std::size_t j = 0; j < lp.num_cols; ++j) cert.primal_objective += lp.objective[j] * r.x[j];
  for (std::size_t j = 0; j < lp.num_cols; ++j) {
    cert.max_bound_violation =
        std::max({cert.max_bound_violation, lp.col_lower[j] - r.x[j], r.x[j] - lp.col_upper[j]});
  }
  std::vector<double> reduced = lp.objective;
  cert.dual_objective = lp.objective_constant;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    const auto& row = lp.rows[i];
    double activity = 0.0;
    for (std::size_t j = 0; j < lp.num_cols; ++j) {
      activity += row.coeffs[j] * r.x[j];
      reduced[j] -= row.coeffs[j] * r.duals[i];
    }
    const double viol = row.relation == Relation::equal ? std::abs(activity - row.rhs)
                                                        : row.rhs - activity;
    cert.max_row_violation = std::max(cert.max_row_violation, viol);
    if (row.relation == Relation::greater_equal) {
      cert.max_dual_sign_violation = std::max(cert.max_dual_sign_violation, -r.duals[i]);
    }
    cert.dual_objective += row.rhs * r.duals[i];
  }
  for (std::size_t j = 0; j < lp.num_cols; ++j) {
    if (reduced[j] > 0) {
      if (std::isinf(lp.col_lower[j])) {
        cert.max_dual_sign_violation = std::max(cert.max_dual_sign_violation, reduced[j]);
      } else {
        cert.dual_objective += reduced[j] * lp.col_lower[j];
      }
    } else if (reduced[j] < 0) {
      if (std::isinf(lp.col_upper[j])) {
        cert.max_dual_sign_violation = std::max(cert.max_dual_sign_violation, -reduced[j]);
      } else {
        cert.dual_objective += reduced[j] * lp.col_upper[j];
      }
    }
  }
  return cert;
}

inline void expect_lp_certificates(const LinearProgram& lp, const LpResult& r) {
  ASSERT_EQ(r.status, LpStatus::optimal);
  const LpCertificate cert = certify(lp, r);
  EXPECT_LE(cert.max_row_violation, 1e-8);
  EXPECT_LE(cert.max_bound_violation, 1e-8);
  EXPECT_LE(cert.max_dual_sign_violation, 1e-7);
  EXPECT_NEAR(cert.primal_objective, r.objective, 1e-9 * (1 + std::abs(r.objective)));
  EXPECT_LE(std::abs(cert.primal_objective - cert.dual_objective),
            1e-6 * (1 + std::abs(cert.primal_objective)));
}

// Random LP with a known feasible point; bounded because every column with an
// infinite side carries a cost pushing away from it.
inline LinearProgram random_feasible_lp(std::mt19937_64& rng, int cols, int rows) {
  std::uniform_real_distribution<double> coeff(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LinearProgram lp;
  lp.num_cols = static_cast<std::size_t>(cols);
  std::vector<double> point(lp.num_cols);
  for (std::size_t j = 0; j < lp.num_cols; ++j) {
    const double lo = std::round(coeff(rng));
    const double hi = lo + 1.0 + std::round(4 * unit(rng));
    point[j] = lo + (hi - lo) * unit(rng);
    double c = coeff(rng);
    const double kind = unit(rng);
    if (kind < 0.15) {
      lp.col_lower.push_back(lo);
      lp.col_upper.push_back(INFINITY);
      c = std::abs(c) + 0.1;
    } else if (kind < 0.25) {
      lp.col_lower.push_back(-INFINITY);
      lp.col_upper.push_back(hi);
      c = -std::abs(c) - 0.1;
    } else {
      lp.col_lower.push_back(lo);
      lp.col_upper.push_back(hi);
    }
    lp.objective.push_back(c);
  }
  for (int i = 0; i < rows; ++i) {
    LpRow row;
    row.coeffs.resize(lp.num_cols);
    double activity = 0.0;
    for (std::size_t j = 0; j < lp.num_cols; ++j) {
      row.coeffs[j] = unit(rng) < 0.3 ? 0.0 : std::round(coeff(rng) * 4) / 4;
      activity += row.coeffs[j] * point[j];
    }
    if (unit(rng) < 0.2) {
      row.relation = Relation::equal;
      row.rhs = activity;
    } else {
      row.relation = Relation::greater_equal;
      row.rhs = activity - 2.0 * unit(rng);
    }
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

}  // namespace polyrlt::test
