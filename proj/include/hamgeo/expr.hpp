#pragma once

// Scalar expressions in the phase variables x1..xn, p1..pn.
//
// Grammar (whitespace insignificant, no implicit multiplication):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | variable | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | ln | sqrt

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hamgeo/errors.hpp"
#include "hamgeo/jet.hpp"
#include "hamgeo/phase_point.hpp"

namespace hamgeo {

/// A reference to x^index or p_index (index is 1-based, as written).
struct VariableRef {
  enum class Kind { position, momentum };

  Kind kind = Kind::position;
  std::size_t index = 1;

  /// Position in the phase ordering (x^1..x^n, p_1..p_n), 0-based.
  std::size_t phase_index(std::size_t dim) const {
    return kind == Kind::position ? index - 1 : dim + index - 1;
  }

  std::string name() const {
    return (kind == Kind::position ? "x" : "p") + std::to_string(index);
  }

  friend auto operator<=>(const VariableRef&, const VariableRef&) = default;
};

inline VariableRef x_var(std::size_t i) { return {VariableRef::Kind::position, i}; }
inline VariableRef p_var(std::size_t i) { return {VariableRef::Kind::momentum, i}; }

enum class NodeKind { constant, variable, negate, add, subtract, multiply, divide, power, function };
enum class Function { sin, cos, exp, ln, sqrt };

inline std::string_view function_name(Function f) {
  constexpr std::array<std::string_view, 5> names{"sin", "cos", "exp", "ln", "sqrt"};
  return names[static_cast<std::size_t>(f)];
}

/// Immutable expression tree with shared subtrees.
class Expression {
 public:
  /// The constant 0.
  Expression() : Expression(constant(0.0)) {}

  static Expression constant(double value) {
    return Expression(std::make_shared<const Node>(Node{NodeKind::constant, value, {}, {}, {}}));
  }
  static Expression variable(VariableRef ref) {
    if (ref.index == 0) throw DimensionError("variable indices start at 1");
    return Expression(std::make_shared<const Node>(Node{NodeKind::variable, 0.0, ref, {}, {}}));
  }
  static Expression apply(Function f, const Expression& arg) {
    Node node{NodeKind::function, 0.0, {}, {arg.node_, nullptr}, f};
    return Expression(std::make_shared<const Node>(std::move(node)));
  }
  static Expression pow(const Expression& base, const Expression& exponent) {
    return binary(NodeKind::power, base, exponent);
  }

  friend Expression operator-(const Expression& e) {
    return Expression(std::make_shared<const Node>(Node{NodeKind::negate, 0.0, {}, {e.node_, nullptr}, {}}));
  }
  friend Expression operator+(const Expression& a, const Expression& b) { return binary(NodeKind::add, a, b); }
  friend Expression operator-(const Expression& a, const Expression& b) { return binary(NodeKind::subtract, a, b); }
  friend Expression operator*(const Expression& a, const Expression& b) { return binary(NodeKind::multiply, a, b); }
  friend Expression operator/(const Expression& a, const Expression& b) { return binary(NodeKind::divide, a, b); }

  NodeKind kind() const noexcept { return node_->kind; }
  double value() const noexcept { return node_->value; }
  VariableRef variable() const noexcept { return node_->variable; }
  Function function() const noexcept { return node_->function; }
  /// Operand of negate/function, left operand of binary nodes.
  Expression lhs() const { return Expression(node_->children[0]); }
  Expression rhs() const { return Expression(node_->children[1]); }

  bool is_constant(double v) const { return kind() == NodeKind::constant && value() == v; }

  /// Structural equality (same tree shape, same constants and variables).
  friend bool operator==(const Expression& a, const Expression& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case NodeKind::constant:
        return a.value() == b.value() || (std::isnan(a.value()) && std::isnan(b.value()));
      case NodeKind::variable:
        return a.variable() == b.variable();
      case NodeKind::function:
        return a.function() == b.function() && a.lhs() == b.lhs();
      case NodeKind::negate:
        return a.lhs() == b.lhs();
      default:
        return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    }
  }

 private:
  struct Node {
    NodeKind kind;
    double value;
    VariableRef variable;
    std::array<std::shared_ptr<const Node>, 2> children;
    Function function;
  };

  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static Expression binary(NodeKind kind, const Expression& a, const Expression& b) {
    return Expression(std::make_shared<const Node>(Node{kind, 0.0, {}, {a.node_, b.node_}, {}}));
  }

  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Inspection

inline void collect_variables(const Expression& e, std::set<VariableRef>& out) {
  switch (e.kind()) {
    case NodeKind::constant:
      return;
    case NodeKind::variable:
      out.insert(e.variable());
      return;
    case NodeKind::negate:
    case NodeKind::function:
      collect_variables(e.lhs(), out);
      return;
    default:
      collect_variables(e.lhs(), out);
      collect_variables(e.rhs(), out);
  }
}

inline std::set<VariableRef> free_variables(const Expression& e) {
  std::set<VariableRef> out;
  collect_variables(e, out);
  return out;
}

/// Throws DimensionError unless every variable index lies in 1..dim.
inline void check_dimension(const Expression& e, std::size_t dim) {
  for (const auto& v : free_variables(e)) {
    if (v.index < 1 || v.index > dim) {
      throw DimensionError("variable " + v.name() + " out of range for dimension " +
                           std::to_string(dim));
    }
  }
}

inline bool depends_on_momenta(const Expression& e) {
  for (const auto& v : free_variables(e)) {
    if (v.kind == VariableRef::Kind::momentum) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(const Expression& e) {
  switch (e.kind()) {
    case NodeKind::add:
    case NodeKind::subtract:
      return 1;
    case NodeKind::multiply:
    case NodeKind::divide:
      return 2;
    case NodeKind::negate:
      return 3;
    case NodeKind::power:
      return 4;
    case NodeKind::constant:
      return std::signbit(e.value()) ? 0 : 5;
    default:
      return 5;
  }
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline void print_into(const Expression& e, std::string& out) {
  auto child = [&out](const Expression& c, bool parens) {
    if (parens) out += '(';
    print_into(c, out);
    if (parens) out += ')';
  };
  const int prec = precedence(e);
  switch (e.kind()) {
    case NodeKind::constant:
      out += format_number(e.value());
      return;
    case NodeKind::variable:
      out += e.variable().name();
      return;
    case NodeKind::function:
      out += function_name(e.function());
      child(e.lhs(), true);
      return;
    case NodeKind::negate:
      out += '-';
      child(e.lhs(), precedence(e.lhs()) < 3);
      return;
    case NodeKind::power:
      child(e.lhs(), precedence(e.lhs()) <= 4);
      out += '^';
      child(e.rhs(), precedence(e.rhs()) < 3);
      return;
    default: {
      static constexpr std::array<char, 4> ops{'+', '-', '*', '/'};
      child(e.lhs(), precedence(e.lhs()) < prec);
      out += ops[static_cast<std::size_t>(e.kind()) - static_cast<std::size_t>(NodeKind::add)];
      child(e.rhs(), precedence(e.rhs()) <= prec);
    }
  }
}

}  // namespace detail

/// Text that parses back to a structurally identical tree.
inline std::string print(const Expression& e) {
  std::string out;
  detail::print_into(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, std::size_t dim) : text_(text), dim_(dim) {}

  Expression parse() {
    Expression e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expression expr() {
    Expression e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expression term() {
    Expression e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expression unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expression power() {
    Expression base = primary();
    if (accept('^')) return Expression::pow(base, unary());
    return base;
  }

  Expression primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (accept('(')) {
      Expression e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expression number() {
    const std::size_t start = pos_;
    auto digits = [this] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) fail("malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t mark = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = mark;  // not an exponent after all
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expression::constant(value);
  }

  Expression identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    for (Function f : {Function::sin, Function::cos, Function::exp, Function::ln, Function::sqrt}) {
      if (name == function_name(f)) {
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        Expression arg = expr();
        if (!accept(')')) fail("expected ')'");
        return Expression::apply(f, arg);
      }
    }

    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'p')) {
      const std::string_view digits = name.substr(1);
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && digits[0] != '0') {
        if (index > dim_) {
          pos_ = start;
          throw DimensionError("variable " + std::string(name) + " out of range for dimension " +
                               std::to_string(dim_) + " at position " + std::to_string(start));
        }
        return Expression::variable(name[0] == 'x' ? x_var(index) : p_var(index));
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t dim_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text` over phase variables of dimension `dim`.
inline Expression parse(std::string_view text, std::size_t dim) {
  if (dim == 0) throw DimensionError("dimension must be at least 1");
  return detail::Parser(text, dim).parse();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

/// Integer value of a variable-free subtree, if it has one.
inline std::optional<long> integer_exponent(const Expression& e);

template <typename S>
S integer_power(const S& base, long k) {
  if (k < 0) {
    if (primal(base) == 0.0) throw DomainError("division by zero (zero base, negative exponent)");
    return S(1.0) / integer_power(base, -k);
  }
  S out(1.0);
  for (long i = 0; i < k; ++i) out = out * base;
  return out;
}

template <typename S>
S evaluate_node(const Expression& e, std::span<const S> z) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  const std::size_t n = z.size() / 2;
  switch (e.kind()) {
    case NodeKind::constant:
      return S(e.value());
    case NodeKind::variable: {
      const auto v = e.variable();
      if (v.index < 1 || v.index > n) throw DimensionError("variable " + v.name() + " out of range");
      return z[v.phase_index(n)];
    }
    case NodeKind::negate:
      return -evaluate_node(e.lhs(), z);
    case NodeKind::add:
      return evaluate_node(e.lhs(), z) + evaluate_node(e.rhs(), z);
    case NodeKind::subtract:
      return evaluate_node(e.lhs(), z) - evaluate_node(e.rhs(), z);
    case NodeKind::multiply:
      return evaluate_node(e.lhs(), z) * evaluate_node(e.rhs(), z);
    case NodeKind::divide: {
      const S den = evaluate_node(e.rhs(), z);
      if (primal(den) == 0.0) throw DomainError("division by zero");
      return evaluate_node(e.lhs(), z) / den;
    }
    case NodeKind::power: {
      const S base = evaluate_node(e.lhs(), z);
      if (auto k = integer_exponent(e.rhs())) return integer_power(base, *k);
      if (!(primal(base) > 0.0)) {
        throw DomainError("pow of a non-positive base with a non-integer exponent");
      }
      return exp(evaluate_node(e.rhs(), z) * log(base));
    }
    case NodeKind::function: {
      const S arg = evaluate_node(e.lhs(), z);
      switch (e.function()) {
        case Function::sin:
          return sin(arg);
        case Function::cos:
          return cos(arg);
        case Function::exp:
          return exp(arg);
        case Function::ln:
          if (!(primal(arg) > 0.0)) throw DomainError("ln of a non-positive argument");
          return log(arg);
        case Function::sqrt:
          if (!(primal(arg) > 0.0)) throw DomainError("sqrt of a non-positive argument");
          return sqrt(arg);
      }
    }
  }
  throw DomainError("malformed expression");
}

inline std::optional<long> integer_exponent(const Expression& e) {
  if (!free_variables(e).empty()) return std::nullopt;
  const double v = evaluate_node<double>(e, std::span<const double>());
  if (std::isfinite(v) && v == std::nearbyint(v) && std::fabs(v) < 1e9) return static_cast<long>(v);
  return std::nullopt;
}

}  // namespace detail

/// Evaluates over any scalar algebra (double, Jet<double>, Jet<Jet<double>>,
/// ...). `z` holds the 2n phase coordinates.
template <typename S>
S evaluate(const Expression& e, std::span<const S> z) {
  if (z.size() % 2 != 0) throw DimensionError("phase coordinates must have even length");
  return detail::evaluate_node<S>(e, z);
}

inline double evaluate(const Expression& e, const PhasePoint& point) {
  const auto z = point.coordinates();
  return evaluate<double>(e, std::span<const double>(z));
}

// ---------------------------------------------------------------------------
// Exact rule-based differentiation, used where a derived vector field must
// itself be an expression (complete lifts, rho_H, Noether fields). The only
// rewriting is dropping terms that are structurally zero.

inline Expression differentiate(const Expression& e, VariableRef v) {
  auto is_zero = [](const Expression& t) { return t.is_constant(0.0); };
  auto is_one = [](const Expression& t) { return t.is_constant(1.0); };
  auto mul = [&](const Expression& a, const Expression& b) {
    if (is_zero(a) || is_zero(b)) return Expression::constant(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    return a * b;
  };
  auto add = [&](const Expression& a, const Expression& b) {
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    return a + b;
  };
  auto sub = [&](const Expression& a, const Expression& b) {
    if (is_zero(b)) return a;
    if (is_zero(a)) return -b;
    return a - b;
  };
  auto div = [&](const Expression& a, const Expression& b) {
    if (is_zero(a)) return Expression::constant(0.0);
    return a / b;
  };

  switch (e.kind()) {
    case NodeKind::constant:
      return Expression::constant(0.0);
    case NodeKind::variable:
      return Expression::constant(e.variable() == v ? 1.0 : 0.0);
    case NodeKind::negate: {
      const Expression d = differentiate(e.lhs(), v);
      return is_zero(d) ? d : -d;
    }
    case NodeKind::add:
      return add(differentiate(e.lhs(), v), differentiate(e.rhs(), v));
    case NodeKind::subtract:
      return sub(differentiate(e.lhs(), v), differentiate(e.rhs(), v));
    case NodeKind::multiply:
      return add(mul(differentiate(e.lhs(), v), e.rhs()), mul(e.lhs(), differentiate(e.rhs(), v)));
    case NodeKind::divide: {
      const Expression num = sub(mul(differentiate(e.lhs(), v), e.rhs()),
                                 mul(e.lhs(), differentiate(e.rhs(), v)));
      return div(num, Expression::pow(e.rhs(), Expression::constant(2.0)));
    }
    case NodeKind::power: {
      const Expression du = differentiate(e.lhs(), v);
      if (auto k = detail::integer_exponent(e.rhs())) {
        if (*k == 0) return Expression::constant(0.0);
        const Expression factor =
            *k == 1 ? Expression::constant(1.0)
                    : mul(Expression::constant(static_cast<double>(*k)),
                          Expression::pow(e.lhs(), Expression::constant(static_cast<double>(*k - 1))));
        return mul(factor, du);
      }
      // d(u^w) = u^w (w' ln u + w u'/u)
      const Expression dw = differentiate(e.rhs(), v);
      const Expression inner = add(mul(dw, Expression::apply(Function::ln, e.lhs())),
                                   div(mul(e.rhs(), du), e.lhs()));
      return mul(e, inner);
    }
    case NodeKind::function: {
      const Expression u = e.lhs();
      const Expression du = differentiate(u, v);
      if (is_zero(du)) return du;
      switch (e.function()) {
        case Function::sin:
          return mul(Expression::apply(Function::cos, u), du);
        case Function::cos:
          return mul(-Expression::apply(Function::sin, u), du);
        case Function::exp:
          return mul(e, du);
        case Function::ln:
          return div(du, u);
        case Function::sqrt:
          return div(du, mul(Expression::constant(2.0), e));
      }
    }
  }
  return Expression::constant(0.0);
}

// ---------------------------------------------------------------------------
// Hamiltonians

/// A named Hamiltonian H(x, p) on the cotangent bundle of an n-manifold.
struct HamiltonianSpec {
  std::string name;
  std::size_t dim = 0;
  Expression expr;

  HamiltonianSpec() = default;
  HamiltonianSpec(std::string name_, std::size_t dim_, Expression expr_)
      : name(std::move(name_)), dim(dim_), expr(std::move(expr_)) {
    if (dim == 0) throw DimensionError("Hamiltonian dimension must be positive");
    check_dimension(expr, dim);
  }

  static HamiltonianSpec parse(std::string name, std::string_view text, std::size_t dim) {
    return HamiltonianSpec(std::move(name), dim, hamgeo::parse(text, dim));
  }
};

/// Driftless control-affine system x' = sum_a u^a X_a(x).
struct ControlAffineSystem {
  std::size_t dim = 0;
  std::vector<std::vector<Expression>> generators;

  void validate() const {
    if (dim == 0) throw DimensionError("control system dimension must be positive");
    for (const auto& g : generators) {
      if (g.size() != dim) throw DimensionError("generator has the wrong number of components");
      for (const auto& c : g) {
        check_dimension(c, dim);
        if (depends_on_momenta(c)) throw DimensionError("generator components must not depend on momenta");
      }
    }
  }
};

/// Quadratic-cost reduction of the control system: the maximized Hamiltonian
/// p_i x'^i - 1/2 |u|^2 with the stationary controls u^a = p . X_a, i.e.
/// H = 1/2 sum_a (sum_i p_i X_a^i(x))^2.
inline HamiltonianSpec pmp_hamiltonian(const ControlAffineSystem& sys, std::string name = "pmp") {
  sys.validate();
  if (sys.generators.empty()) throw DimensionError("control system needs at least one generator");
  std::optional<Expression> sum;
  for (const auto& g : sys.generators) {
    std::optional<Expression> control;
    for (std::size_t i = 0; i < sys.dim; ++i) {
      const Expression term = Expression::variable(p_var(i + 1)) * g[i];
      control = control ? *control + term : term;
    }
    const Expression square = Expression::pow(*control, Expression::constant(2.0));
    sum = sum ? *sum + square : square;
  }
  return HamiltonianSpec(std::move(name), sys.dim, Expression::constant(0.5) * *sum);
}

}  // namespace hamgeo
