#include "polyrlt/local_search.hpp"

#include <algorithm>
#include <cmath>

namespace polyrlt {
namespace {

constexpr double kViolationTol = 1e-6;
constexpr double kStationarityTol = 1e-5;
constexpr double kInnerTol = 1e-6;
constexpr int kMaxOuter = 20;
constexpr int kMaxInner = 20000;
constexpr double kInitialPenalty = 10.0;
constexpr double kMaxPenalty = 1e12;

Clock::time_point deadline_after(double seconds) {
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(std::max(seconds, 0.0)));
}

double seconds_until(Clock::time_point deadline) {
  return std::chrono::duration<double>(deadline - Clock::now()).count();
}

// Augmented Lagrangian of a problem with c_i(x) >= 0 and h_i(x) = 0.
class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const Problem& problem, const Box& box)
      : problem_(problem),
        box_(box),
        ineq_mult_(problem.inequalities.size(), 0.0),
        eq_mult_(problem.equalities.size(), 0.0) {}

  double value(std::span<const double> x) const {
    double v = problem_.objective.eval(x);
    for (std::size_t i = 0; i < problem_.inequalities.size(); ++i) {
      const auto& c = problem_.inequalities[i];
      const double shifted = std::max(0.0, ineq_mult_[i] - penalty_ * (c.body.eval(x) - c.rhs));
      v += (shifted * shifted - ineq_mult_[i] * ineq_mult_[i]) / (2.0 * penalty_);
    }
    for (std::size_t i = 0; i < problem_.equalities.size(); ++i) {
      const auto& c = problem_.equalities[i];
      const double h = c.body.eval(x) - c.rhs;
      v += eq_mult_[i] * h + 0.5 * penalty_ * h * h;
    }
    return v;
  }

  std::vector<double> gradient(std::span<const double> x) const {
    std::vector<double> g = problem_.objective.gradient(x);
    for (std::size_t i = 0; i < problem_.inequalities.size(); ++i) {
      const auto& c = problem_.inequalities[i];
      const double w = std::max(0.0, ineq_mult_[i] - penalty_ * (c.body.eval(x) - c.rhs));
      if (w == 0.0) continue;
      const auto gc = c.body.gradient(x);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] -= w * gc[j];
    }
    for (std::size_t i = 0; i < problem_.equalities.size(); ++i) {
      const auto& c = problem_.equalities[i];
      const double w = eq_mult_[i] + penalty_ * (c.body.eval(x) - c.rhs);
      const auto gc = c.body.gradient(x);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] += w * gc[j];
    }
    return g;
  }

  double violation(std::span<const double> x) const {
    double v = 0.0;
    for (const auto& c : problem_.inequalities) v = std::max(v, c.rhs - c.body.eval(x));
    for (const auto& c : problem_.equalities) v = std::max(v, std::abs(c.body.eval(x) - c.rhs));
    return std::isnan(v) ? kInfinity : v;
  }

  double projected_gradient(std::span<const double> x, std::span<const double> g) const {
    double norm = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      norm = std::max(norm, std::abs(clamp(j, x[j] - g[j]) - x[j]));
    }
    return norm;
  }

  double clamp(std::size_t j, double v) const {
    return std::clamp(v, box_.lower[j], box_.upper[j]);
  }

  void update(std::span<const double> x, bool raise_penalty) {
    for (std::size_t i = 0; i < problem_.inequalities.size(); ++i) {
      const auto& c = problem_.inequalities[i];
      ineq_mult_[i] = std::max(0.0, ineq_mult_[i] - penalty_ * (c.body.eval(x) - c.rhs));
    }
    for (std::size_t i = 0; i < problem_.equalities.size(); ++i) {
      const auto& c = problem_.equalities[i];
      eq_mult_[i] += penalty_ * (c.body.eval(x) - c.rhs);
    }
    if (raise_penalty) penalty_ = std::min(penalty_ * 10.0, kMaxPenalty);
  }

 private:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  const Problem& problem_;
  const Box& box_;
  std::vector<double> ineq_mult_;
  std::vector<double> eq_mult_;
  double penalty_ = kInitialPenalty;
};

// Spectral projected gradient on the box. Returns false when the deadline
// interrupted it.
bool minimize_on_box(const AugmentedLagrangian& al, std::vector<double>& x,
                     Clock::time_point deadline) {
  const std::size_t n = x.size();
  double fx = al.value(x);
  std::vector<double> g = al.gradient(x);
  double gmax = 1.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  double alpha = 1.0 / gmax;
  std::vector<double> d(n), trial(n);
  for (int it = 0; it < kMaxInner; ++it) {
    if (al.projected_gradient(x, g) <= kInnerTol) return true;
    if (it % 16 == 15 && Clock::now() >= deadline) return false;
    double slope = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = al.clamp(j, x[j] - alpha * g[j]) - x[j];
      slope += g[j] * d[j];
    }
    if (slope >= 0.0) return true;
    double t = 1.0;
    double ft = 0.0;
    while (true) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = al.clamp(j, x[j] + t * d[j]);
      ft = al.value(trial);
      if (ft <= fx + 1e-4 * t * slope) break;
      t *= 0.5;
      if (t < 1e-14) return true;
    }
    std::vector<double> g_new = al.gradient(trial);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = trial[j] - x[j];
      ss += s * s;
      sy += s * (g_new[j] - g[j]);
    }
    alpha = sy > 1e-300 ? std::clamp(ss / sy, 1e-12, 1e12) : 1e6;
    x.swap(trial);
    g.swap(g_new);
    fx = ft;
  }
  return true;
}

}  // namespace

const char* to_string(IncumbentSource source) {
  switch (source) {
    case IncumbentSource::node_integral:
      return "node_integral";
    case IncumbentSource::nlp_round:
      return "nlp_round";
    case IncumbentSource::nlp_fix:
      return "nlp_fix";
    case IncumbentSource::minlp_ls:
      return "minlp_ls";
  }
  return "unknown";
}

std::optional<Incumbent> make_incumbent(const Problem& problem, std::vector<double> point,
                                        IncumbentSource source) {
  if (!check_feasible(problem, point)) return std::nullopt;
  const double value = eval_objective(problem, point);
  return Incumbent{std::move(point), value, source};
}

NlpResult nlp_local_solve(const Problem& problem, const Box& box, std::span<const double> x0,
                          double budget_seconds) {
  box.validate(problem.num_vars());
  const auto deadline = deadline_after(budget_seconds);
  NlpResult result;
  AugmentedLagrangian al(problem, box);
  std::vector<double> x(problem.num_vars());
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = al.clamp(j, j < x0.size() && std::isfinite(x0[j]) ? x0[j] : 0.5 * (box.lower[j] + box.upper[j]));
  }
  for (int outer = 1; outer <= kMaxOuter; ++outer) {
    result.outer_iterations = outer;
    const bool finished = minimize_on_box(al, x, deadline);
    result.violation = al.violation(x);
    result.projected_gradient = al.projected_gradient(x, al.gradient(x));
    if (result.violation <= kViolationTol && result.projected_gradient <= kStationarityTol) {
      result.success = true;
      break;
    }
    if (!finished || Clock::now() >= deadline) break;
    al.update(x, result.violation > kViolationTol);
  }
  result.objective = problem.objective.eval(x);
  result.x = std::move(x);
  return result;
}

std::vector<double> round_integers(const Problem& problem, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    if (problem.is_integer(j)) out[j] = std::floor(out[j] + 0.5);
  }
  return out;
}

std::optional<Box> fixed_integer_box(const Problem& problem, const Box& box,
                                     std::span<const double> x) {
  Box fixed = box;
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    if (!problem.is_integer(j)) continue;
    const double v = std::floor(x[j] + 0.5);
    if (v < box.lower[j] - 1e-9 || v > box.upper[j] + 1e-9) return std::nullopt;
    fixed.lower[j] = fixed.upper[j] = v;
  }
  return fixed;
}

std::optional<Incumbent> try_round(const Problem& problem, std::span<const double> x_bar,
                                   double budget_seconds) {
  NlpResult nlp = nlp_local_solve(problem, Box::of(problem), x_bar, budget_seconds);
  if (!nlp.success) return std::nullopt;
  return make_incumbent(problem, round_integers(problem, nlp.x), IncumbentSource::nlp_round);
}

std::optional<Incumbent> try_fix(const Problem& problem, std::span<const double> x_bar,
                                 double budget_seconds) {
  const auto box = fixed_integer_box(problem, Box::of(problem), x_bar);
  if (!box) return std::nullopt;
  NlpResult nlp = nlp_local_solve(problem, *box, round_integers(problem, x_bar), budget_seconds);
  if (!nlp.success) return std::nullopt;
  return make_incumbent(problem, round_integers(problem, nlp.x), IncumbentSource::nlp_fix);
}

std::optional<Incumbent> try_round_plus_fix(const Problem& problem,
                                            std::span<const double> x_bar,
                                            double budget_seconds) {
  const auto deadline = deadline_after(budget_seconds);
  auto rounded = try_round(problem, x_bar, 0.5 * budget_seconds);
  auto fixed = try_fix(problem, x_bar, std::max(seconds_until(deadline), 0.0));
  if (rounded && fixed) return fixed->value < rounded->value ? fixed : rounded;
  return rounded ? rounded : fixed;
}

std::optional<Incumbent> minlp_local_solve(const Problem& problem, std::span<const double> x0,
                                           double budget_seconds) {
  const auto deadline = deadline_after(budget_seconds);
  std::optional<Incumbent> best = try_round_plus_fix(problem, x0, budget_seconds);
  std::vector<double> current = best ? best->point : round_integers(problem, x0);
  const Box box = Box::of(problem);
  for (std::size_t j = 0; j < current.size(); ++j) {
    current[j] = std::clamp(current[j], box.lower[j], box.upper[j]);
  }

  bool improved = problem.has_integers();
  while (improved) {
    improved = false;
    for (std::size_t j = 0; j < problem.num_vars() && !improved; ++j) {
      if (!problem.is_integer(j)) continue;
      for (double step : {-1.0, 1.0}) {
        if (Clock::now() >= deadline) break;
        std::vector<double> candidate = current;
        candidate[j] += step;
        if (candidate[j] < box.lower[j] || candidate[j] > box.upper[j]) continue;
        auto found = try_fix(problem, candidate, seconds_until(deadline));
        if (found && (!best || found->value < best->value - 1e-9)) {
          best = std::move(found);
          current = best->point;
          improved = true;
          break;
        }
      }
    }
  }
  if (best) best->source = IncumbentSource::minlp_ls;
  return best;
}

}  // namespace polyrlt
