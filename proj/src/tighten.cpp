#include "polyrlt/tighten.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "polyrlt/errors.hpp"
#include "polyrlt/interval.hpp"
#include "polyrlt/milp.hpp"
#include "polyrlt/relax.hpp"

namespace polyrlt {
namespace {

constexpr double kMinChange = 1e-6;
constexpr double kOutward = 1e-9;

struct Term {
  Monomial monomial;
  double coeff;
};

Monomial drop_variable(const Monomial& m, int var) {
  std::vector<int> rest;
  for (int i : m.indices()) {
    if (i != var) rest.push_back(i);
  }
  return Monomial(rest);
}

// Returns false if the box is proven empty.
bool narrow(Box& box, std::size_t j, Interval implied, bool& changed) {
  implied = widen(implied, kOutward);
  const double lo = std::max(box.lower[j], implied.lo);
  const double hi = std::min(box.upper[j], implied.hi);
  if (lo > hi) {
    if (lo - hi > kOutward * std::max(1.0, std::abs(lo))) return false;
    const double mid = 0.5 * (lo + hi);
    box.lower[j] = box.upper[j] = mid;
    changed = true;
    return true;
  }
  if (lo > box.lower[j] + kMinChange) {
    box.lower[j] = lo;
    changed = true;
  }
  if (hi < box.upper[j] - kMinChange) {
    box.upper[j] = hi;
    changed = true;
  }
  return true;
}

bool propagate(const Polynomial& body, Interval target, Box& box, bool& changed) {
  std::vector<Term> terms;
  for (const auto& [m, c] : body.terms()) terms.push_back({m, c});

  auto term_range = [&](const Term& t) {
    return t.coeff * eval_interval(t.monomial, box.lower, box.upper);
  };
  Interval total = Interval::point(body.constant());
  for (const auto& t : terms) total = total + term_range(t);
  if (intersect(widen(total, kOutward), target).empty()) return false;

  for (std::size_t i = 0; i < terms.size(); ++i) {
    Interval rest = Interval::point(body.constant());
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (k != i) rest = rest + term_range(terms[k]);
    }
    const Interval image = (1.0 / terms[i].coeff) * (target - rest);
    for (int var : terms[i].monomial.variables()) {
      const auto j = static_cast<std::size_t>(var);
      const Interval others =
          eval_interval(drop_variable(terms[i].monomial, var), box.lower, box.upper);
      const Interval powered = widen(divide(image, others), kOutward);
      const Interval implied = invert_power(powered, terms[i].monomial.exponent(var),
                                            {box.lower[j], box.upper[j]});
      if (implied.empty()) return false;
      if (!narrow(box, j, implied, changed)) return false;
    }
  }
  return true;
}

}  // namespace

bool round_integer_bounds(const Problem& problem, Box& box) {
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    if (!problem.is_integer(j)) continue;
    box.lower[j] = std::ceil(box.lower[j] - 1e-6);
    box.upper[j] = std::floor(box.upper[j] + 1e-6);
    if (box.lower[j] > box.upper[j]) return false;
  }
  return true;
}

FbbtResult fbbt(const Problem& problem, const Box& box, int max_passes) {
  if (max_passes < 1) throw UsageError("fbbt: max_passes must be at least 1");
  box.validate(problem.num_vars());
  FbbtResult result{box, false, 0};
  Box& b = result.box;
  while (result.passes < max_passes) {
    ++result.passes;
    bool changed = false;
    for (const auto& c : problem.inequalities) {
      if (!propagate(c.body, {c.rhs, kInf}, b, changed)) {
        result.infeasible = true;
        return result;
      }
    }
    for (const auto& c : problem.equalities) {
      if (!propagate(c.body, Interval::point(c.rhs), b, changed)) {
        result.infeasible = true;
        return result;
      }
    }
    const Box before = b;
    if (!round_integer_bounds(problem, b)) {
      result.infeasible = true;
      return result;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b.lower[j] > before.lower[j] + kMinChange || b.upper[j] < before.upper[j] - kMinChange) {
        changed = true;
      }
    }
    if (!changed) break;
  }
  return result;
}

ObbtResult obbt(const Problem& problem, const Box& box, const ObbtOptions& options) {
  box.validate(problem.num_vars());
  const std::size_t n = problem.num_vars();
  const bool milp = options.mode == ObbtMode::milp && problem.has_integers();
  const Relaxation relax = build_relaxation(
      problem, box, milp ? RelaxationMode::milp : RelaxationMode::continuous);
  const std::vector<std::size_t> integral = relax.integral_columns();
  const double budget =
      options.budget_seconds.value_or(options.mode == ObbtMode::milp ? 10.0 : 5.0);

  enum class Outcome { bound, infeasible, stalled };
  struct Direction {
    Outcome outcome = Outcome::stalled;
    double bound = 0.0;  // proven lower bound on +-x_j
  };
  std::vector<Direction> directions(2 * n);

  auto solve_direction = [&](std::size_t d) {
    const std::size_t j = d / 2;
    const double sign = d % 2 == 0 ? 1.0 : -1.0;
    LinearProgram lp = relax.lp;
    std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
    lp.objective[j] = sign;
    lp.objective_constant = 0.0;
    auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(budget));
    if (options.deadline) deadline = std::min(deadline, *options.deadline);
    const double seconds = std::chrono::duration<double>(deadline - Clock::now()).count();
    Direction& out = directions[d];
    if (seconds <= 0.0) return;
    if (milp) {
      const MilpResult r = solve_milp(lp, integral, {seconds, 1000000}, options.milp_gap_tol);
      if (r.status == MilpStatus::infeasible) {
        out.outcome = Outcome::infeasible;
      } else if (r.status != MilpStatus::failed && std::isfinite(r.best_bound)) {
        out.outcome = Outcome::bound;
        out.bound = r.best_bound;
      }
    } else {
      const LpResult r = solve_lp(lp, LpOptions{100000, deadline});
      if (r.status == LpStatus::infeasible) {
        out.outcome = Outcome::infeasible;
      } else if (r.status == LpStatus::optimal) {
        out.outcome = Outcome::bound;
        out.bound = r.objective;
      }
    }
  };

  const int threads = std::clamp(options.threads, 1, static_cast<int>(std::max<std::size_t>(1, 2 * n)));
  if (threads == 1) {
    for (std::size_t d = 0; d < 2 * n; ++d) solve_direction(d);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t d = next++; d < 2 * n; d = next++) solve_direction(d);
      });
    }
  }

  ObbtResult result{box, false, 0, 0};
  for (std::size_t d = 0; d < 2 * n; ++d) {
    const Direction& dir = directions[d];
    if (dir.outcome == Outcome::infeasible) {
      result.infeasible = true;
      return result;
    }
    if (dir.outcome == Outcome::stalled) {
      ++result.stalled;
      continue;
    }
    ++result.solved;
    const std::size_t j = d / 2;
    const double margin = 1e-7 * (1.0 + std::abs(dir.bound));
    if (d % 2 == 0) {
      result.box.lower[j] = std::max(result.box.lower[j], dir.bound - margin);
    } else {
      result.box.upper[j] = std::min(result.box.upper[j], -dir.bound + margin);
    }
    if (result.box.lower[j] > result.box.upper[j]) {
      // Both directions solved but margins crossed through round-off.
      const double mid = 0.5 * (result.box.lower[j] + result.box.upper[j]);
      result.box.lower[j] = result.box.upper[j] = mid;
    }
  }
  if (!round_integer_bounds(problem, result.box)) result.infeasible = true;
  return result;
}

}  // namespace polyrlt
