#include "polyrlt/interval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace polyrlt {
namespace {

double safe_mul(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

double signed_root(double v, int e) {
  if (std::isinf(v)) return v;
  double r = std::pow(std::abs(v), 1.0 / e);
  return v < 0 ? -r : r;
}

Interval empty_interval() { return {kInf, -kInf}; }

}  // namespace

Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }

Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }

Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

Interval operator*(Interval a, Interval b) {
  const double p[] = {safe_mul(a.lo, b.lo), safe_mul(a.lo, b.hi),
                      safe_mul(a.hi, b.lo), safe_mul(a.hi, b.hi)};
  return {*std::min_element(std::begin(p), std::end(p)),
          *std::max_element(std::begin(p), std::end(p))};
}

Interval operator*(double s, Interval a) { return Interval::point(s) * a; }

std::string Interval::to_string() const {
  std::ostringstream out;
  out << "[" << lo << ", " << hi << "]";
  return out.str();
}

Interval intersect(Interval a, Interval b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

Interval hull(Interval a, Interval b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Interval divide(Interval a, Interval b) {
  if (a.empty() || b.empty()) return empty_interval();
  if (!b.contains_zero()) return a * Interval{1.0 / b.hi, 1.0 / b.lo};
  if (a.contains_zero()) return Interval::entire();
  if (b.lo == 0.0 && b.hi == 0.0) return empty_interval();
  // Zero at one end of b only: the quotient is a half-line.
  if (b.lo == 0.0) {
    return a.lo > 0.0 ? Interval{a.lo / b.hi, kInf} : Interval{-kInf, a.hi / b.hi};
  }
  if (b.hi == 0.0) {
    return a.lo > 0.0 ? Interval{-kInf, a.lo / b.lo} : Interval{a.hi / b.lo, kInf};
  }
  return Interval::entire();
}

Interval power(Interval a, int exponent) {
  if (exponent == 0) return Interval::point(1.0);
  if (exponent == 1) return a;
  const double plo = std::pow(a.lo, exponent);
  const double phi = std::pow(a.hi, exponent);
  if (exponent % 2 == 1) return {plo, phi};
  if (a.lo >= 0.0) return {plo, phi};
  if (a.hi <= 0.0) return {phi, plo};
  return {0.0, std::max(plo, phi)};
}

Interval invert_power(Interval image, int exponent, Interval domain) {
  if (image.empty() || domain.empty()) return empty_interval();
  if (exponent == 1) return intersect(image, domain);
  if (exponent % 2 == 1) {
    return intersect({signed_root(image.lo, exponent), signed_root(image.hi, exponent)},
                     domain);
  }
  Interval nonneg = intersect(image, {0.0, kInf});
  if (nonneg.empty()) return empty_interval();
  const double r = signed_root(nonneg.hi, exponent);
  const double p = signed_root(nonneg.lo, exponent);
  Interval pos = intersect({p, r}, domain);
  Interval neg = intersect({-r, -p}, domain);
  return hull(pos, neg);
}

Interval widen(Interval a, double rel) {
  if (a.empty()) return a;
  if (std::isfinite(a.lo)) a.lo -= rel * std::max(1.0, std::abs(a.lo));
  if (std::isfinite(a.hi)) a.hi += rel * std::max(1.0, std::abs(a.hi));
  return a;
}

Interval eval_interval(const Monomial& m, std::span<const double> lower,
                       std::span<const double> upper) {
  Interval result = Interval::point(1.0);
  for (int var : m.variables()) {
    const auto j = static_cast<std::size_t>(var);
    result = result * power({lower[j], upper[j]}, m.exponent(var));
  }
  return result;
}

Interval eval_interval(const Polynomial& p, std::span<const double> lower,
                       std::span<const double> upper) {
  Interval result = Interval::point(p.constant());
  for (const auto& [m, c] : p.terms()) {
    result = result + c * eval_interval(m, lower, upper);
  }
  return result;
}

}  // namespace polyrlt
