#include "polyrlt/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polyrlt/errors.hpp"

namespace polyrlt {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPrimalTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;
constexpr int kMaxRefinements = 4;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ColStatus { basic, at_lower, at_upper, free_zero };
enum class ColKind { structural, logical, artificial };
enum class PhaseOutcome { optimal, unbounded, stalled };

// Tableau columns: structural variables, one logical per row (a.x - s = b,
// s in [0, inf) for >= rows and [0, 0] for = rows), then artificials for rows
// whose logical could not start basic-feasible.
class TableauSimplex {
 public:
  TableauSimplex(const LinearProgram& lp, const LpOptions& options)
      : lp_(lp), options_(options), m_(lp.rows.size()), n_(lp.num_cols) {}

  LpResult run() {
    setup();
    LpResult result;
    if (num_artificials_ > 0) {
      set_phase_costs(/*phase_one=*/true);
      PhaseOutcome outcome = optimize();
      if (outcome == PhaseOutcome::stalled) return stalled(result);
      if (!refine()) return stalled(result);
      double infeasibility = 0.0;
      for (std::size_t j = first_artificial_; j < total_; ++j) infeasibility += x_[j];
      double scale = 1.0;
      for (const auto& row : lp_.rows) scale = std::max(scale, std::abs(row.rhs));
      if (infeasibility > 1e-9 * scale) {
        result.status = LpStatus::infeasible;
        result.iterations = iterations_;
        return result;
      }
      retire_artificials();
    }
    set_phase_costs(/*phase_one=*/false);
    PhaseOutcome outcome = optimize();
    if (outcome == PhaseOutcome::stalled) return stalled(result);
    if (outcome == PhaseOutcome::unbounded) {
      result.status = LpStatus::unbounded;
      result.iterations = iterations_;
      return result;
    }
    if (!refine()) return stalled(result);

    result.status = LpStatus::optimal;
    result.iterations = iterations_;
    result.x.assign(x_.begin(), x_.begin() + static_cast<long>(n_));
    result.objective = lp_.objective_constant;
    for (std::size_t j = 0; j < n_; ++j) result.objective += lp_.objective[j] * x_[j];
    result.duals = duals_;
    result.reduced_costs.assign(reduced_.begin(), reduced_.begin() + static_cast<long>(n_));
    return result;
  }

 private:
  LpResult stalled(LpResult& result) {
    result.status = LpStatus::stalled;
    result.iterations = iterations_;
    return result;
  }

  void setup() {
    std::vector<double> residual(m_);
    num_artificials_ = 0;
    std::vector<int> artificial_sign(m_, 0);
    lower_.assign(n_ + m_, 0.0);
    upper_.assign(n_ + m_, 0.0);
    x_.assign(n_ + m_, 0.0);
    status_.assign(n_ + m_, ColStatus::at_lower);
    kind_.assign(n_ + m_, ColKind::structural);

    for (std::size_t j = 0; j < n_; ++j) {
      lower_[j] = lp_.col_lower[j];
      upper_[j] = lp_.col_upper[j];
      if (std::isfinite(lower_[j])) {
        x_[j] = lower_[j];
        status_[j] = ColStatus::at_lower;
      } else if (std::isfinite(upper_[j])) {
        x_[j] = upper_[j];
        status_[j] = ColStatus::at_upper;
      } else {
        x_[j] = 0.0;
        status_[j] = ColStatus::free_zero;
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& row = lp_.rows[i];
      double activity = 0.0;
      for (std::size_t j = 0; j < n_; ++j) activity += row.coeffs[j] * x_[j];
      residual[i] = row.rhs - activity;
      const std::size_t s = n_ + i;
      kind_[s] = ColKind::logical;
      lower_[s] = 0.0;
      upper_[s] = row.relation == Relation::greater_equal ? kInfinity : 0.0;
      const bool logical_ok = row.relation == Relation::greater_equal
                                  ? residual[i] <= 0.0
                                  : residual[i] == 0.0;
      if (!logical_ok) {
        artificial_sign[i] = residual[i] > 0.0 ? 1 : -1;
        ++num_artificials_;
      }
    }

    first_artificial_ = n_ + m_;
    total_ = first_artificial_ + num_artificials_;
    lower_.resize(total_, 0.0);
    upper_.resize(total_, kInfinity);
    x_.resize(total_, 0.0);
    status_.resize(total_, ColStatus::at_lower);
    kind_.resize(total_, ColKind::artificial);

    full_ = RowMatrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(total_));
    rhs_ = Eigen::VectorXd(static_cast<Eigen::Index>(m_));
    basis_.assign(m_, 0);
    std::size_t next_artificial = first_artificial_;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t j = 0; j < n_; ++j) full_(ii, static_cast<Eigen::Index>(j)) = lp_.rows[i].coeffs[j];
      full_(ii, static_cast<Eigen::Index>(n_ + i)) = -1.0;
      rhs_(ii) = lp_.rows[i].rhs;
      if (artificial_sign[i] != 0) {
        full_(ii, static_cast<Eigen::Index>(next_artificial)) = artificial_sign[i];
        basis_[i] = next_artificial;
        x_[next_artificial] = std::abs(residual[i]);
        status_[next_artificial] = ColStatus::basic;
        ++next_artificial;
      } else {
        basis_[i] = n_ + i;
        x_[n_ + i] = -residual[i];
        status_[n_ + i] = ColStatus::basic;
      }
    }
    // The starting basis is diagonal with entries -1 (logical) or +-1
    // (artificial), so its inverse applied to the full matrix is a row scaling.
    tableau_ = full_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double diag = full_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(basis_[i]));
      tableau_.row(static_cast<Eigen::Index>(i)) /= diag;
    }
    cost_.assign(total_, 0.0);
    reduced_.assign(total_, 0.0);
    duals_.assign(m_, 0.0);
    enterable_.assign(total_, true);
    for (std::size_t j = 0; j < total_; ++j) {
      if (lower_[j] == upper_[j]) enterable_[j] = false;
    }
  }

  void set_phase_costs(bool phase_one) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    if (phase_one) {
      for (std::size_t j = first_artificial_; j < total_; ++j) cost_[j] = 1.0;
    } else {
      for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.objective[j];
    }
    recompute_reduced_costs();
  }

  void recompute_reduced_costs() {
    for (std::size_t j = 0; j < total_; ++j) reduced_[j] = cost_[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const auto row = tableau_.row(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < total_; ++j) reduced_[j] -= cb * row(static_cast<Eigen::Index>(j));
    }
    for (std::size_t i = 0; i < m_; ++i) reduced_[basis_[i]] = 0.0;
  }

  bool out_of_budget() {
    if (iterations_ >= options_.iteration_limit) return true;
    if (options_.deadline && (iterations_ % 8 == 0) && Clock::now() >= *options_.deadline) {
      return true;
    }
    return false;
  }

  // Returns the improving direction (+1/-1) for column j, or 0.
  int improving_direction(std::size_t j) const {
    const double d = reduced_[j];
    switch (status_[j]) {
      case ColStatus::at_lower:
        return d < -kDualTol ? 1 : 0;
      case ColStatus::at_upper:
        return d > kDualTol ? -1 : 0;
      case ColStatus::free_zero:
        return d < -kDualTol ? 1 : (d > kDualTol ? -1 : 0);
      case ColStatus::basic:
        return 0;
    }
    return 0;
  }

  PhaseOutcome optimize() {
    int degenerate_run = 0;
    const int bland_threshold = 3 * static_cast<int>(m_ + n_);
    while (true) {
      if (out_of_budget()) return PhaseOutcome::stalled;
      const bool bland = degenerate_run >= bland_threshold;

      std::size_t entering = total_;
      int direction = 0;
      double best = 0.0;
      for (std::size_t j = 0; j < total_; ++j) {
        if (!enterable_[j]) continue;
        const int dir = improving_direction(j);
        if (dir == 0) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(reduced_[j]) > best) {
          best = std::abs(reduced_[j]);
          entering = j;
          direction = dir;
        }
      }
      if (entering == total_) return PhaseOutcome::optimal;

      const auto q = static_cast<Eigen::Index>(entering);
      // Harris pass one: largest step keeping every basic within its bound
      // plus the primal tolerance.
      double relaxed_limit = kInfinity;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = direction * tableau_(static_cast<Eigen::Index>(i), q);
        if (std::abs(alpha) <= kPivotTol) continue;
        const std::size_t b = basis_[i];
        if (alpha > 0 && std::isfinite(lower_[b])) {
          relaxed_limit = std::min(relaxed_limit, (x_[b] - lower_[b] + kPrimalTol) / alpha);
        } else if (alpha < 0 && std::isfinite(upper_[b])) {
          relaxed_limit = std::min(relaxed_limit, (upper_[b] - x_[b] + kPrimalTol) / -alpha);
        }
      }
      // Pass two: among rows whose exact ratio fits, take the largest pivot
      // (or the smallest basic index under Bland's rule).
      std::size_t leave_row = m_;
      double step = kInfinity;
      double best_pivot = 0.0;
      std::size_t best_index = total_;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = direction * tableau_(static_cast<Eigen::Index>(i), q);
        if (std::abs(alpha) <= kPivotTol) continue;
        const std::size_t b = basis_[i];
        double ratio = kInfinity;
        if (alpha > 0 && std::isfinite(lower_[b])) {
          ratio = (x_[b] - lower_[b]) / alpha;
        } else if (alpha < 0 && std::isfinite(upper_[b])) {
          ratio = (upper_[b] - x_[b]) / -alpha;
        } else {
          continue;
        }
        if (ratio > relaxed_limit) continue;
        bool take;
        if (bland) {
          take = b < best_index;
        } else {
          take = std::abs(alpha) > best_pivot;
        }
        if (take) {
          leave_row = i;
          step = std::max(ratio, 0.0);
          best_pivot = std::abs(alpha);
          best_index = b;
        }
      }

      const double flip = upper_[entering] - lower_[entering];
      ++iterations_;
      if (std::isfinite(flip) && flip <= step) {
        apply_step(entering, direction, flip);
        status_[entering] = direction > 0 ? ColStatus::at_upper : ColStatus::at_lower;
        x_[entering] = direction > 0 ? upper_[entering] : lower_[entering];
        degenerate_run = flip <= kDegenerateStep ? degenerate_run + 1 : 0;
        continue;
      }
      if (leave_row == m_) return PhaseOutcome::unbounded;

      apply_step(entering, direction, step);
      const std::size_t leaving = basis_[leave_row];
      const double alpha = direction * tableau_(static_cast<Eigen::Index>(leave_row), q);
      if (alpha > 0) {
        status_[leaving] = ColStatus::at_lower;
        x_[leaving] = lower_[leaving];
      } else {
        status_[leaving] = ColStatus::at_upper;
        x_[leaving] = upper_[leaving];
      }
      pivot(leave_row, entering);
      degenerate_run = step <= kDegenerateStep ? degenerate_run + 1 : 0;
    }
  }

  void apply_step(std::size_t entering, int direction, double step) {
    if (step == 0.0) return;
    const auto q = static_cast<Eigen::Index>(entering);
    x_[entering] += direction * step;
    for (std::size_t i = 0; i < m_; ++i) {
      x_[basis_[i]] -= direction * step * tableau_(static_cast<Eigen::Index>(i), q);
    }
  }

  void pivot(std::size_t row, std::size_t entering) {
    const auto r = static_cast<Eigen::Index>(row);
    const auto q = static_cast<Eigen::Index>(entering);
    tableau_.row(r) /= tableau_(r, q);
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const double factor = tableau_(ii, q);
      if (factor != 0.0) tableau_.row(ii) -= factor * tableau_.row(r);
    }
    const double dq = reduced_[entering];
    if (dq != 0.0) {
      for (std::size_t j = 0; j < total_; ++j) reduced_[j] -= dq * tableau_(r, static_cast<Eigen::Index>(j));
    }
    reduced_[entering] = 0.0;
    status_[basis_[row]] = status_[basis_[row]] == ColStatus::basic ? ColStatus::at_lower
                                                                     : status_[basis_[row]];
    basis_[row] = entering;
    status_[entering] = ColStatus::basic;
  }

  // Pivots basic artificials out where possible and pins every artificial at
  // zero so it can never re-enter.
  void retire_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t b = basis_[i];
      if (kind_[b] != ColKind::artificial) continue;
      const auto r = static_cast<Eigen::Index>(i);
      std::size_t best = total_;
      double best_mag = 1e-7;
      for (std::size_t j = 0; j < first_artificial_; ++j) {
        if (status_[j] == ColStatus::basic) continue;
        const double mag = std::abs(tableau_(r, static_cast<Eigen::Index>(j)));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      x_[b] = 0.0;
      if (best != total_) {
        pivot(i, best);
        status_[b] = ColStatus::at_lower;
      }
    }
    for (std::size_t j = first_artificial_; j < total_; ++j) {
      upper_[j] = 0.0;
      enterable_[j] = false;
      if (status_[j] != ColStatus::basic) {
        status_[j] = ColStatus::at_lower;
        x_[j] = 0.0;
      }
    }
    recompute_basic_values();
  }

  // Recomputes basic values, duals and reduced costs from a fresh LU of the
  // basis; if the refined point is not optimal the tableau is reinverted and
  // iteration continues. Returns false when refinement cannot settle.
  bool refine() {
    for (int round = 0; round <= kMaxRefinements; ++round) {
      if (m_ == 0) {
        recompute_reduced_costs();
        return true;
      }
      Eigen::MatrixXd basis_matrix(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
      for (std::size_t i = 0; i < m_; ++i) {
        basis_matrix.col(static_cast<Eigen::Index>(i)) = full_.col(static_cast<Eigen::Index>(basis_[i]));
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
      Eigen::VectorXd rhs = rhs_;
      for (std::size_t j = 0; j < total_; ++j) {
        if (status_[j] == ColStatus::basic || x_[j] == 0.0) continue;
        rhs -= full_.col(static_cast<Eigen::Index>(j)) * x_[j];
      }
      Eigen::VectorXd xb = lu.solve(rhs);
      Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
      for (std::size_t i = 0; i < m_; ++i) cb(static_cast<Eigen::Index>(i)) = cost_[basis_[i]];
      Eigen::VectorXd y = lu.transpose().solve(cb);
      if (!xb.allFinite() || !y.allFinite()) return false;

      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = xb(static_cast<Eigen::Index>(i));
      Eigen::VectorXd reduced = Eigen::Map<const Eigen::VectorXd>(cost_.data(), static_cast<Eigen::Index>(total_)) -
                                full_.transpose() * y;
      for (std::size_t j = 0; j < total_; ++j) reduced_[j] = reduced(static_cast<Eigen::Index>(j));
      for (std::size_t i = 0; i < m_; ++i) {
        reduced_[basis_[i]] = 0.0;
        duals_[i] = y(static_cast<Eigen::Index>(i));
      }

      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t b = basis_[i];
        const double tol = 1e-8 * std::max(1.0, std::abs(x_[b]));
        if (x_[b] < lower_[b] - tol || x_[b] > upper_[b] + tol) return false;
      }
      bool dual_ok = true;
      for (std::size_t j = 0; j < total_; ++j) {
        if (enterable_[j] && improving_direction(j) != 0) dual_ok = false;
      }
      if (dual_ok) return true;
      if (round == kMaxRefinements) return false;

      tableau_ = lu.solve(Eigen::MatrixXd(full_));
      if (optimize() != PhaseOutcome::optimal) return false;
    }
    return false;
  }

  void recompute_basic_values() {
    if (m_ == 0) return;
    Eigen::VectorXd rhs = rhs_;
    for (std::size_t j = 0; j < total_; ++j) {
      if (status_[j] == ColStatus::basic || x_[j] == 0.0) continue;
      rhs -= full_.col(static_cast<Eigen::Index>(j)) * x_[j];
    }
    Eigen::MatrixXd basis_matrix(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      basis_matrix.col(static_cast<Eigen::Index>(i)) = full_.col(static_cast<Eigen::Index>(basis_[i]));
    }
    Eigen::VectorXd xb = Eigen::PartialPivLU<Eigen::MatrixXd>(basis_matrix).solve(rhs);
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = xb(static_cast<Eigen::Index>(i));
  }

  const LinearProgram& lp_;
  const LpOptions& options_;
  const std::size_t m_;
  const std::size_t n_;
  std::size_t num_artificials_ = 0;
  std::size_t first_artificial_ = 0;
  std::size_t total_ = 0;
  int iterations_ = 0;

  RowMatrix full_;
  RowMatrix tableau_;
  Eigen::VectorXd rhs_;
  std::vector<std::size_t> basis_;
  std::vector<double> lower_, upper_, x_, cost_, reduced_, duals_;
  std::vector<ColStatus> status_;
  std::vector<ColKind> kind_;
  std::vector<bool> enterable_;
};

}  // namespace

void LinearProgram::validate() const {
  if (objective.size() != num_cols || col_lower.size() != num_cols ||
      col_upper.size() != num_cols) {
    throw UsageError("linear program: objective/bounds length differs from column count");
  }
  for (std::size_t j = 0; j < num_cols; ++j) {
    if (std::isnan(objective[j]) || std::isnan(col_lower[j]) || std::isnan(col_upper[j])) {
      throw UsageError("linear program: NaN in objective or bounds");
    }
    if (col_lower[j] > col_upper[j]) {
      throw UsageError("linear program: column " + std::to_string(j) + " has lower > upper");
    }
  }
  for (const auto& row : rows) {
    if (row.coeffs.size() != num_cols) {
      throw UsageError("linear program: row length differs from column count");
    }
    if (!std::isfinite(row.rhs)) throw UsageError("linear program: non-finite rhs");
    for (double c : row.coeffs) {
      if (!std::isfinite(c)) throw UsageError("linear program: non-finite coefficient");
    }
  }
}

std::string LinearProgram::to_lp_format(const std::vector<std::string>& col_names) const {
  std::ostringstream out;
  out.precision(17);
  auto write_linear = [&](const std::vector<double>& coeffs) {
    bool first = true;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      if (coeffs[j] == 0.0) continue;
      out << (coeffs[j] < 0 ? " - " : (first ? " " : " + ")) << std::abs(coeffs[j]) << " "
          << col_names[j];
      first = false;
    }
    if (first) out << " 0 " << (col_names.empty() ? "x0" : col_names.front());
  };
  out << "\\ objective constant: " << objective_constant << "\n";
  out << "Minimize\n obj:";
  write_linear(objective);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << " r" << i << ":";
    write_linear(rows[i].coeffs);
    out << (rows[i].relation == Relation::equal ? " = " : " >= ") << rows[i].rhs << "\n";
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < num_cols; ++j) {
    out << " ";
    if (std::isinf(col_lower[j])) {
      out << "-inf";
    } else {
      out << col_lower[j];
    }
    out << " <= " << col_names[j] << " <= ";
    if (std::isinf(col_upper[j])) {
      out << "+inf";
    } else {
      out << col_upper[j];
    }
    out << "\n";
  }
  out << "End\n";
  return out.str();
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
    case LpStatus::stalled:
      return "stalled";
  }
  return "unknown";
}

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  return TableauSimplex(lp, options).run();
}

}  // namespace polyrlt
