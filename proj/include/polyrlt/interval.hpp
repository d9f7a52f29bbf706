#pragma once

#include <limits>
#include <span>
#include <string>

#include "polyrlt/poly.hpp"

namespace polyrlt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval arithmetic over the extended reals. Products use the
// 0 * inf = 0 convention; an empty interval has lo > hi.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  static Interval entire() { return {}; }
  static Interval point(double v) { return {v, v}; }

  bool empty() const { return lo > hi; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }
  double width() const { return hi - lo; }

  friend Interval operator+(Interval a, Interval b);
  friend Interval operator-(Interval a, Interval b);
  friend Interval operator-(Interval a);
  friend Interval operator*(Interval a, Interval b);
  friend Interval operator*(double s, Interval a);

  friend bool operator==(const Interval&, const Interval&) = default;

  std::string to_string() const;
};

Interval intersect(Interval a, Interval b);
Interval hull(Interval a, Interval b);

// Enclosure of {v : v * d in a for some d in b}; the entire line when b has
// zero strictly inside or a contains zero.
Interval divide(Interval a, Interval b);

Interval power(Interval a, int exponent);

// Smallest interval containing {x in domain : x^exponent in image}. May be
// empty.
Interval invert_power(Interval image, int exponent, Interval domain);

// Pads an interval outward by rel * max(1, |bound|) on each finite side.
Interval widen(Interval a, double rel);

// Range enclosure of a monomial / polynomial over a box.
Interval eval_interval(const Monomial& m, std::span<const double> lower,
                       std::span<const double> upper);
Interval eval_interval(const Polynomial& p, std::span<const double> lower,
                       std::span<const double> upper);

}  // namespace polyrlt
