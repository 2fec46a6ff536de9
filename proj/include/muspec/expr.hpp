#pragma once

// Small arithmetic expression language used for coefficient functions and
// log-rates. Grammar, loosest binding first:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | var | call | '(' expr ')'
//   call    := name '(' expr (',' expr)* ')'
//
// The single variable may be spelled `t` or `k`. Calls: exp, log, abs, sgn,
// sqrt (unary) and min, max (binary).

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace muspec {

enum class ExprOp {
  Constant,
  Variable,
  Negate,
  Add,
  Subtract,
  Multiply,
  Divide,
  Power,
  Exp,
  Log,
  Abs,
  Sgn,
  Sqrt,
  Min,
  Max,
};

/// Immutable expression tree. Copies share the underlying nodes.
class Expr {
 public:
  struct Node {
    ExprOp op;
    double value = 0.0;  // Constant only
    std::vector<std::shared_ptr<const Node>> args;
  };

  Expr() = default;

  static Expr constant(double value);
  static Expr variable();
  static Expr unary(ExprOp op, Expr arg);
  static Expr binary(ExprOp op, Expr lhs, Expr rhs);

  bool empty() const { return root_ == nullptr; }
  ExprOp op() const { return root_->op; }
  double constant_value() const { return root_->value; }
  std::size_t arity() const { return root_->args.size(); }
  Expr arg(std::size_t i) const { return Expr(root_->args.at(i)); }

  /// Evaluates with the variable bound to `x`. Throws DomainError.
  double eval(double x) const;

  /// Overflow-safe evaluation of log|e(x)| together with the sign of e(x).
  /// exp(), products, quotients and powers are folded in log space, so
  /// exp(-3*k^2) stays representable for large k. A zero value yields
  /// log_abs = -inf and sign 0.
  struct LogAbs {
    double log_abs;
    int sign;
  };
  LogAbs eval_log_abs(double x) const;

  /// Fully parenthesised text that parses back to the same tree.
  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  std::shared_ptr<const Node> root_;
};

/// Parses `text`. Throws SyntaxError (with byte offset and expected tokens)
/// on malformed input and on unknown identifiers.
Expr parse_expr(std::string_view text);

const char* expr_op_name(ExprOp op);

}  // namespace muspec
