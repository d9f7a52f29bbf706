#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace polyrlt {

// A monomial stored as the sorted multiset of its variable indices, so x0^2*x1
// is {0, 0, 1}. Two monomials with the same multiset are equal.
class Monomial {
 public:
  Monomial() = default;
  Monomial(std::initializer_list<int> indices);
  explicit Monomial(std::vector<int> indices);

  // x_var^exponent.
  static Monomial power(int var, int exponent);

  int degree() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  const std::vector<int>& indices() const { return indices_; }

  // Exponent of `var` in this monomial (0 if absent).
  int exponent(int var) const;

  // Distinct variables, ascending.
  std::vector<int> variables() const;

  // Largest referenced index, or -1 for the empty monomial.
  int max_index() const;

  Monomial operator*(const Monomial& other) const;

  // Removes one occurrence of `var`; the variable must be present.
  Monomial without_one(int var) const;

  double eval(std::span<const double> point) const;

  std::string to_string() const;

  // Canonical order: lexicographic on the sorted index sequence.
  friend auto operator<=>(const Monomial&, const Monomial&) = default;
  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<int> indices_;
};

// Sparse polynomial: nonconstant terms keyed by monomial plus a constant.
// Zero coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double>;

  Polynomial() = default;
  explicit Polynomial(double constant) : constant_(constant) {}

  static Polynomial variable(int var);
  static Polynomial term(const Monomial& monomial, double coeff);

  // Merges `coeff * monomial` into the polynomial. An empty monomial adds to
  // the constant.
  void add_term(const Monomial& monomial, double coeff);
  void add_constant(double value) { constant_ += value; }

  const TermMap& terms() const { return terms_; }
  double constant() const { return constant_; }
  double coefficient(const Monomial& monomial) const;

  // 0 for a constant polynomial.
  int degree() const;
  int max_index() const;
  bool is_zero() const { return terms_.empty() && constant_ == 0.0; }

  // Sum of coeff * prod x_j^e_j in canonical term order, then the constant.
  double eval(std::span<const double> point) const;
  std::vector<double> gradient(std::span<const double> point) const;

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scale);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  // Renders with x<j> variable names unless `names` is given.
  std::string to_string(const std::vector<std::string>* names = nullptr) const;

 private:
  TermMap terms_;
  double constant_ = 0.0;
};

}  // namespace polyrlt

template <>
struct std::hash<polyrlt::Monomial> {
  std::size_t operator()(const polyrlt::Monomial& m) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int i : m.indices()) {
      h ^= static_cast<std::size_t>(i) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};
