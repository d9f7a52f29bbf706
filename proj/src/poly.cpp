#include "polyrlt/poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polyrlt/errors.hpp"

namespace polyrlt {

Monomial::Monomial(std::initializer_list<int> indices) : indices_(indices) {
  std::sort(indices_.begin(), indices_.end());
}

Monomial::Monomial(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
}

Monomial Monomial::power(int var, int exponent) {
  return Monomial(std::vector<int>(static_cast<std::size_t>(exponent), var));
}

int Monomial::exponent(int var) const {
  auto [lo, hi] = std::equal_range(indices_.begin(), indices_.end(), var);
  return static_cast<int>(hi - lo);
}

std::vector<int> Monomial::variables() const {
  std::vector<int> vars = indices_;
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

int Monomial::max_index() const { return indices_.empty() ? -1 : indices_.back(); }

Monomial Monomial::operator*(const Monomial& other) const {
  std::vector<int> merged;
  merged.reserve(indices_.size() + other.indices_.size());
  std::merge(indices_.begin(), indices_.end(), other.indices_.begin(),
             other.indices_.end(), std::back_inserter(merged));
  Monomial result;
  result.indices_ = std::move(merged);
  return result;
}

Monomial Monomial::without_one(int var) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), var);
  if (it == indices_.end() || *it != var) {
    throw InternalError("variable " + std::to_string(var) + " not in monomial " +
                        to_string());
  }
  Monomial result = *this;
  result.indices_.erase(result.indices_.begin() + (it - indices_.begin()));
  return result;
}

double Monomial::eval(std::span<const double> point) const {
  double value = 1.0;
  for (int i : indices_) value *= point[static_cast<std::size_t>(i)];
  return value;
}

std::string Monomial::to_string() const {
  std::ostringstream out;
  out << "X_";
  for (int i : indices_) out << i << (i == indices_.back() ? "" : ".");
  return out.str();
}

Polynomial Polynomial::variable(int var) { return term(Monomial{var}, 1.0); }

Polynomial Polynomial::term(const Monomial& monomial, double coeff) {
  Polynomial p;
  p.add_term(monomial, coeff);
  return p;
}

void Polynomial::add_term(const Monomial& monomial, double coeff) {
  if (monomial.empty()) {
    constant_ += coeff;
    return;
  }
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(monomial, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::coefficient(const Monomial& monomial) const {
  if (monomial.empty()) return constant_;
  auto it = terms_.find(monomial);
  return it == terms_.end() ? 0.0 : it->second;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

int Polynomial::max_index() const {
  int idx = -1;
  for (const auto& [m, c] : terms_) idx = std::max(idx, m.max_index());
  return idx;
}

double Polynomial::eval(std::span<const double> point) const {
  if (max_index() >= static_cast<int>(point.size())) {
    throw UsageError("polynomial references variable " + std::to_string(max_index()) +
                     " but point has dimension " + std::to_string(point.size()));
  }
  double value = 0.0;
  for (const auto& [m, c] : terms_) value += c * m.eval(point);
  return value + constant_;
}

std::vector<double> Polynomial::gradient(std::span<const double> point) const {
  if (max_index() >= static_cast<int>(point.size())) {
    throw UsageError("gradient: point dimension too small");
  }
  std::vector<double> grad(point.size(), 0.0);
  for (const auto& [m, c] : terms_) {
    for (int var : m.variables()) {
      int e = m.exponent(var);
      double partial = c * e;
      for (int other : m.indices()) {
        if (other == var) continue;
        partial *= point[static_cast<std::size_t>(other)];
      }
      partial *= std::pow(point[static_cast<std::size_t>(var)], e - 1);
      grad[static_cast<std::size_t>(var)] += partial;
    }
  }
  return grad;
}

Polynomial Polynomial::operator-() const {
  Polynomial result = *this;
  result *= -1.0;
  return result;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  constant_ += other.constant_;
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  constant_ -= other.constant_;
  return *this;
}

Polynomial& Polynomial::operator*=(double scale) {
  if (scale == 0.0) {
    terms_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (auto& [m, c] : terms_) c *= scale;
  constant_ *= scale;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial result(a.constant_ * b.constant_);
  for (const auto& [ma, ca] : a.terms_) {
    result.add_term(ma, ca * b.constant_);
    for (const auto& [mb, cb] : b.terms_) result.add_term(ma * mb, ca * cb);
  }
  for (const auto& [mb, cb] : b.terms_) result.add_term(mb, a.constant_ * cb);
  return result;
}

std::string Polynomial::to_string(const std::vector<std::string>* names) const {
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  auto var_name = [&](int j) {
    return names ? (*names)[static_cast<std::size_t>(j)] : "x" + std::to_string(j);
  };
  for (const auto& [m, c] : terms_) {
    double mag = c;
    if (first) {
      if (c < 0) {
        out << "-";
        mag = -c;
      }
    } else {
      out << (c < 0 ? " - " : " + ");
      mag = std::abs(c);
    }
    first = false;
    if (mag != 1.0) out << mag << "*";
    bool first_factor = true;
    for (int var : m.variables()) {
      if (!first_factor) out << "*";
      first_factor = false;
      out << var_name(var);
      if (int e = m.exponent(var); e > 1) out << "^" << e;
    }
  }
  if (constant_ != 0.0 || first) {
    if (first) {
      out << constant_;
    } else {
      out << (constant_ < 0 ? " - " : " + ") << std::abs(constant_);
    }
  }
  return out.str();
}

}  // namespace polyrlt
