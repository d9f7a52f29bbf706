#include "polyrlt/instance_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "polyrlt/errors.hpp"

namespace polyrlt {
namespace {

class LineParser {
 public:
  LineParser(std::string_view text, int line, const std::map<std::string, int>& vars)
      : text_(text), line_(line), vars_(vars) {}

  bool at_end() {
    skip_space();
    return pos_ == text_.size();
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(line_, message); }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'" + near());
  }

  bool peek_name() {
    skip_space();
    return pos_ < text_.size() && (std::isalpha(uc(text_[pos_])) || text_[pos_] == '_');
  }

  bool peek_number() {
    skip_space();
    return pos_ < text_.size() && (std::isdigit(uc(text_[pos_])) || text_[pos_] == '.');
  }

  std::string name() {
    if (!peek_name()) fail("expected a name" + near());
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(uc(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  double unsigned_number() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(uc(text_[pos_])) || text_[pos_] == '.' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')) ||
            ((text_[pos_] == 'e' || text_[pos_] == 'E') && pos_ > start))) {
      ++pos_;
    }
    if (pos_ == start) {
      if (peek_name()) {
        const std::string word = name();
        fail("non-finite or malformed number '" + word + "'");
      }
      fail("expected a number" + near());
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      fail("malformed number '" + std::string(first, last) + "'");
    }
    if (!std::isfinite(value)) fail("non-finite number '" + std::string(first, last) + "'");
    return value;
  }

  double signed_number() {
    double sign = 1.0;
    if (accept("-")) {
      sign = -1.0;
    } else {
      accept("+");
    }
    return sign * unsigned_number();
  }

  int integer() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(uc(text_[pos_]))) ++pos_;
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (pos_ == start || ec != std::errc() || value < 1) fail("expected a positive exponent");
    return value;
  }

  Polynomial polynomial() {
    Polynomial poly;
    double sign = 1.0;
    if (accept("-")) {
      sign = -1.0;
    } else {
      accept("+");
    }
    while (true) {
      term(poly, sign);
      if (accept("+")) {
        sign = 1.0;
      } else if (accept("-")) {
        sign = -1.0;
      } else {
        return poly;
      }
    }
  }

  std::string near() {
    skip_space();
    if (pos_ >= text_.size()) return " at end of line";
    return " near '" + std::string(text_.substr(pos_, 12)) + "'";
  }

 private:
  static unsigned char uc(char c) { return static_cast<unsigned char>(c); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(uc(text_[pos_]))) ++pos_;
  }

  void term(Polynomial& poly, double sign) {
    double coeff = sign;
    std::vector<int> indices;
    if (peek_number()) {
      coeff *= unsigned_number();
      if (!accept("*")) {
        poly.add_term(Monomial(), coeff);
        return;
      }
    }
    do {
      const std::string var = name();
      auto it = vars_.find(var);
      if (it == vars_.end()) fail("unknown variable '" + var + "'");
      int power = 1;
      if (accept("^")) power = integer();
      for (int k = 0; k < power; ++k) indices.push_back(it->second);
    } while (accept("*"));
    poly.add_term(Monomial(indices), coeff);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
  const std::map<std::string, int>& vars_;
};

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

Problem parse_instance(std::string_view text, std::string name) {
  Problem problem;
  problem.name = std::move(name);
  std::map<std::string, int> vars;
  std::set<std::string> constraint_names;
  bool have_objective = false;

  int line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineParser p(line, line_no, vars);
    if (p.at_end()) continue;
    const std::string keyword = p.name();
    if (keyword == "var") {
      Variable v;
      v.name = p.name();
      if (vars.count(v.name)) p.fail("duplicate declaration of variable '" + v.name + "'");
      bool have_lower = false;
      bool have_upper = false;
      while (true) {
        if (!have_lower && p.accept(">=")) {
          v.lower = p.signed_number();
          have_lower = true;
        } else if (!have_upper && p.accept("<=")) {
          v.upper = p.signed_number();
          have_upper = true;
        } else {
          break;
        }
      }
      bool binary = false;
      if (!p.at_end()) {
        const std::string kind = p.name();
        if (kind == "integer") {
          v.integer = true;
        } else if (kind == "binary") {
          v.integer = true;
          binary = true;
        } else {
          p.fail("unknown variable kind '" + kind + "'");
        }
      }
      if (binary) {
        v.lower = have_lower ? std::max(v.lower, 0.0) : 0.0;
        v.upper = have_upper ? std::min(v.upper, 1.0) : 1.0;
      } else if (!have_lower || !have_upper) {
        p.fail("variable '" + v.name + "' needs finite bounds '>= NUM <= NUM'");
      }
      if (v.lower > v.upper) p.fail("variable '" + v.name + "' has lower bound above upper bound");
      if (!p.at_end()) p.fail("unexpected text" + p.near());
      vars.emplace(v.name, static_cast<int>(problem.variables.size()));
      problem.variables.push_back(std::move(v));
    } else if (keyword == "min" || keyword == "max") {
      if (have_objective) p.fail("duplicate objective");
      have_objective = true;
      Polynomial objective = p.polynomial();
      if (!p.at_end()) p.fail("unexpected text" + p.near());
      if (keyword == "max") {
        problem.sense = Sense::maximize;
        objective = -objective;
      }
      problem.objective = std::move(objective);
    } else if (keyword == "st") {
      Constraint c;
      c.name = p.name();
      if (!constraint_names.insert(c.name).second) {
        p.fail("duplicate declaration of constraint '" + c.name + "'");
      }
      p.expect(":");
      c.body = p.polynomial();
      if (p.accept(">=")) {
        c.rhs = p.signed_number();
        problem.inequalities.push_back(std::move(c));
      } else if (p.accept("<=")) {
        c.rhs = -p.signed_number();
        c.body = -c.body;
        problem.inequalities.push_back(std::move(c));
      } else if (p.accept("=")) {
        p.accept("=");
        c.rhs = p.signed_number();
        problem.equalities.push_back(std::move(c));
      } else {
        p.fail("expected '>=', '<=' or '='" + p.near());
      }
      if (!p.at_end()) p.fail("unexpected text" + p.near());
    } else {
      p.fail("unknown statement '" + keyword + "'");
    }
  }
  if (!have_objective) throw ParseError(line_no, "missing objective ('min' or 'max' line)");
  return problem;
}

Problem load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open instance file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str(), path.stem().string());
}

std::string serialize_instance(const Problem& problem) {
  const auto names = problem.variable_names();
  std::ostringstream out;
  for (const auto& v : problem.variables) {
    out << "var " << v.name << " >= " << format_number(v.lower) << " <= "
        << format_number(v.upper);
    if (v.integer) out << " integer";
    out << "\n";
  }
  if (problem.sense == Sense::maximize) {
    out << "max " << (-problem.objective).to_string(&names) << "\n";
  } else {
    out << "min " << problem.objective.to_string(&names) << "\n";
  }
  for (const auto& c : problem.inequalities) {
    out << "st " << c.name << ": " << c.body.to_string(&names) << " >= " << format_number(c.rhs)
        << "\n";
  }
  for (const auto& c : problem.equalities) {
    out << "st " << c.name << ": " << c.body.to_string(&names) << " = " << format_number(c.rhs)
        << "\n";
  }
  return out.str();
}

}  // namespace polyrlt
