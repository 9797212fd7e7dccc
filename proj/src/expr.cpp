#include "mcl/expr.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace mcl::expr {

namespace {

// Recursive descent over
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('-' | '+')* power
//   power  := atom ('^' unary)?          (right associative)
//   atom   := number | 'i' | 'pi' | 't' | func '(' expr ')' | '(' expr ')'
// compiled to a closure tree evaluated per t.
using Node = std::function<Complex(double)>;

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Node parse() {
    Node e = expr();
    skip_ws();
    if (pos_ != s_.size())
      throw std::invalid_argument("expression: trailing input at '" +
                                  s_.substr(pos_) + "'");
    return e;
  }

 private:
  Node expr() {
    Node lhs = term();
    while (true) {
      skip_ws();
      if (consume('+')) {
        Node rhs = term();
        lhs = [lhs, rhs](double t) { return lhs(t) + rhs(t); };
      } else if (consume('-')) {
        Node rhs = term();
        lhs = [lhs, rhs](double t) { return lhs(t) - rhs(t); };
      } else {
        return lhs;
      }
    }
  }

  Node term() {
    Node lhs = unary();
    while (true) {
      skip_ws();
      if (consume('*')) {
        Node rhs = unary();
        lhs = [lhs, rhs](double t) { return lhs(t) * rhs(t); };
      } else if (consume('/')) {
        Node rhs = unary();
        lhs = [lhs, rhs](double t) { return lhs(t) / rhs(t); };
      } else {
        return lhs;
      }
    }
  }

  Node unary() {
    skip_ws();
    if (consume('-')) {
      Node inner = unary();
      return [inner](double t) { return -inner(t); };
    }
    if (consume('+')) return unary();
    return power();
  }

  Node power() {
    Node base = atom();
    skip_ws();
    if (consume('^')) {
      Node exp = unary();
      return [base, exp](double t) { return std::pow(base(t), exp(t)); };
    }
    return base;
  }

  Node atom() {
    skip_ws();
    if (pos_ >= s_.size())
      throw std::invalid_argument("expression: unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    if (consume('(')) {
      Node inner = expr();
      expect(')');
      return inner;
    }
    throw std::invalid_argument(std::string("expression: unexpected '") + c +
                                "'");
  }

  Node number() {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s_.substr(pos_), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("expression: bad number at '" +
                                  s_.substr(pos_) + "'");
    }
    pos_ += used;
    return [v](double) { return Complex(v, 0.0); };
  }

  Node word() {
    std::size_t end = pos_;
    while (end < s_.size() &&
           std::isalnum(static_cast<unsigned char>(s_[end])))
      ++end;
    const std::string name = s_.substr(pos_, end - pos_);
    pos_ = end;

    if (name == "i") return [](double) { return kI; };
    if (name == "pi") return [](double) { return Complex(kPi, 0.0); };
    if (name == "t") return [](double t) { return Complex(t, 0.0); };

    skip_ws();
    expect('(');
    Node arg = expr();
    expect(')');
    if (name == "exp") return [arg](double t) { return std::exp(arg(t)); };
    if (name == "sin") return [arg](double t) { return std::sin(arg(t)); };
    if (name == "cos") return [arg](double t) { return std::cos(arg(t)); };
    if (name == "sqrt") return [arg](double t) { return std::sqrt(arg(t)); };
    if (name == "conj") return [arg](double t) { return std::conj(arg(t)); };
    throw std::invalid_argument("expression: unknown function '" + name + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (!consume(c))
      throw std::invalid_argument(std::string("expression: expected '") + c +
                                  "' at position " + std::to_string(pos_));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::function<Complex(double)> parse_scalar(const std::string& text) {
  // Parse eagerly so syntax errors surface at config load, not evaluation.
  Parser parser(text);
  return parser.parse();
}

std::function<MatC(double)> parse_matrix(
    const std::vector<std::vector<std::string>>& entries) {
  const int rows = static_cast<int>(entries.size());
  if (rows == 0) throw std::invalid_argument("expression matrix: empty");
  const int cols = static_cast<int>(entries[0].size());
  std::vector<std::function<Complex(double)>> fns;
  fns.reserve(static_cast<std::size_t>(rows) * cols);
  for (const auto& row : entries) {
    if (static_cast<int>(row.size()) != cols)
      throw std::invalid_argument("expression matrix: ragged rows");
    for (const auto& cell : row) fns.push_back(parse_scalar(cell));
  }
  return [rows, cols, fns](double t) {
    MatC m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = fns[r * cols + c](t);
    return m;
  };
}

}  // namespace mcl::expr
