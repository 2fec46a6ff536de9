#include "muspec/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "muspec/errors.hpp"

namespace muspec {

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct CallInfo {
  const char* name;
  ExprOp op;
  int arity;
};

constexpr std::array<CallInfo, 7> kCalls{{
    {"exp", ExprOp::Exp, 1},
    {"log", ExprOp::Log, 1},
    {"abs", ExprOp::Abs, 1},
    {"sgn", ExprOp::Sgn, 1},
    {"sqrt", ExprOp::Sqrt, 1},
    {"min", ExprOp::Min, 2},
    {"max", ExprOp::Max, 2},
}};

const std::vector<std::string> kOperandStart{"number", "identifier", "'('", "'-'"};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    skip_space();
    if (pos_ == text_.size()) throw SyntaxError(pos_, kOperandStart, "empty expression");
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) {
      throw SyntaxError(pos_, {"operator", "end of input"},
                        std::string("unexpected '") + text_[pos_] + "'");
    }
    return e;
  }

 private:
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

  void expect(char c) {
    if (!accept(c)) {
      throw SyntaxError(pos_, {std::string("'") + c + "'"}, describe_here());
    }
  }

  std::string describe_here() const {
    if (pos_ >= text_.size()) return "unexpected end of input";
    return std::string("unexpected '") + text_[pos_] + "'";
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(ExprOp::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = Expr::binary(ExprOp::Subtract, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(ExprOp::Multiply, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(ExprOp::Divide, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary(ExprOp::Negate, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::binary(ExprOp::Power, base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, kOperandStart, "unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    if (accept('(')) {
      Expr inner = parse_sum();
      expect(')');
      return inner;
    }
    throw SyntaxError(pos_, kOperandStart, describe_here());
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw SyntaxError(start, {"number"}, "malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // "2e" is a number followed by an identifier
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(value)) {
      throw SyntaxError(start, {"number"}, "number out of range");
    }
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    for (const auto& call : kCalls) {
      if (name != call.name) continue;
      expect('(');
      Expr first = parse_sum();
      if (call.arity == 2) {
        expect(',');
        Expr second = parse_sum();
        expect(')');
        return Expr::binary(call.op, first, second);
      }
      expect(')');
      return Expr::unary(call.op, first);
    }
    if (name == "t" || name == "k") return Expr::variable();
    throw SyntaxError(start, {"t", "k", "exp", "log", "abs", "sgn", "sqrt", "min", "max"},
                      "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

[[noreturn]] void domain_fail(const Expr& e, double x, const char* what) {
  throw DomainError(e.to_string(), x, what);
}

double checked(const Expr& e, double x, double v) {
  if (!std::isfinite(v)) domain_fail(e, x, "non-finite result");
  return v;
}

double power(const Expr& e, double x, double base, double expo) {
  if (base == 0.0 && expo < 0.0) domain_fail(e, x, "division by zero");
  if (base < 0.0 && !is_integer(expo)) domain_fail(e, x, "negative base with non-integer exponent");
  return std::pow(base, expo);
}

double eval_node(const Expr& e, double x) {
  switch (e.op()) {
    case ExprOp::Constant:
      return e.constant_value();
    case ExprOp::Variable:
      return x;
    case ExprOp::Negate:
      return -eval_node(e.arg(0), x);
    case ExprOp::Add:
      return checked(e, x, eval_node(e.arg(0), x) + eval_node(e.arg(1), x));
    case ExprOp::Subtract:
      return checked(e, x, eval_node(e.arg(0), x) - eval_node(e.arg(1), x));
    case ExprOp::Multiply:
      return checked(e, x, eval_node(e.arg(0), x) * eval_node(e.arg(1), x));
    case ExprOp::Divide: {
      const double num = eval_node(e.arg(0), x);
      const double den = eval_node(e.arg(1), x);
      if (den == 0.0) domain_fail(e, x, "division by zero");
      return checked(e, x, num / den);
    }
    case ExprOp::Power:
      return checked(e, x, power(e, x, eval_node(e.arg(0), x), eval_node(e.arg(1), x)));
    case ExprOp::Exp:
      return checked(e, x, std::exp(eval_node(e.arg(0), x)));
    case ExprOp::Log: {
      const double v = eval_node(e.arg(0), x);
      if (v <= 0.0) domain_fail(e, x, "log of a non-positive value");
      return std::log(v);
    }
    case ExprOp::Abs:
      return std::fabs(eval_node(e.arg(0), x));
    case ExprOp::Sgn:
      return sgn(eval_node(e.arg(0), x));
    case ExprOp::Sqrt: {
      const double v = eval_node(e.arg(0), x);
      if (v < 0.0) domain_fail(e, x, "sqrt of a negative value");
      return std::sqrt(v);
    }
    case ExprOp::Min:
      return std::min(eval_node(e.arg(0), x), eval_node(e.arg(1), x));
    case ExprOp::Max:
      return std::max(eval_node(e.arg(0), x), eval_node(e.arg(1), x));
  }
  return 0.0;
}

using LogAbs = Expr::LogAbs;

LogAbs from_value(double v) {
  if (v == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
  return {std::log(std::fabs(v)), v > 0 ? 1 : -1};
}

LogAbs log_sum(LogAbs a, LogAbs b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.log_abs < b.log_abs) std::swap(a, b);
  const double ratio = std::exp(b.log_abs - a.log_abs);
  if (a.sign == b.sign) return {a.log_abs + std::log1p(ratio), a.sign};
  if (ratio == 1.0) return {-std::numeric_limits<double>::infinity(), 0};
  return {a.log_abs + std::log1p(-ratio), a.sign};
}

LogAbs log_abs_node(const Expr& e, double x) {
  switch (e.op()) {
    case ExprOp::Constant:
      return from_value(e.constant_value());
    case ExprOp::Variable:
      return from_value(x);
    case ExprOp::Negate: {
      LogAbs r = log_abs_node(e.arg(0), x);
      r.sign = -r.sign;
      return r;
    }
    case ExprOp::Add:
      return log_sum(log_abs_node(e.arg(0), x), log_abs_node(e.arg(1), x));
    case ExprOp::Subtract: {
      LogAbs rhs = log_abs_node(e.arg(1), x);
      rhs.sign = -rhs.sign;
      return log_sum(log_abs_node(e.arg(0), x), rhs);
    }
    case ExprOp::Multiply: {
      const LogAbs a = log_abs_node(e.arg(0), x);
      const LogAbs b = log_abs_node(e.arg(1), x);
      if (a.sign == 0 || b.sign == 0) return from_value(0.0);
      return {a.log_abs + b.log_abs, a.sign * b.sign};
    }
    case ExprOp::Divide: {
      const LogAbs a = log_abs_node(e.arg(0), x);
      const LogAbs b = log_abs_node(e.arg(1), x);
      if (b.sign == 0) domain_fail(e, x, "division by zero");
      if (a.sign == 0) return a;
      return {a.log_abs - b.log_abs, a.sign * b.sign};
    }
    case ExprOp::Power: {
      const LogAbs base = log_abs_node(e.arg(0), x);
      const double expo = eval_node(e.arg(1), x);
      if (base.sign == 0) {
        if (expo < 0.0) domain_fail(e, x, "division by zero");
        return expo == 0.0 ? LogAbs{0.0, 1} : base;
      }
      int sign = 1;
      if (base.sign < 0) {
        if (!is_integer(expo)) domain_fail(e, x, "negative base with non-integer exponent");
        sign = std::fmod(std::fabs(expo), 2.0) == 1.0 ? -1 : 1;
      }
      return {expo * base.log_abs, sign};
    }
    case ExprOp::Exp:
      return {eval_node(e.arg(0), x), 1};
    case ExprOp::Abs: {
      LogAbs r = log_abs_node(e.arg(0), x);
      r.sign = r.sign == 0 ? 0 : 1;
      return r;
    }
    case ExprOp::Sqrt: {
      const LogAbs r = log_abs_node(e.arg(0), x);
      if (r.sign < 0) domain_fail(e, x, "sqrt of a negative value");
      return {0.5 * r.log_abs, r.sign};
    }
    case ExprOp::Log:
    case ExprOp::Sgn:
    case ExprOp::Min:
    case ExprOp::Max:
      return from_value(eval_node(e, x));
  }
  return from_value(0.0);
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

Expr Expr::constant(double value) {
  return Expr(std::make_shared<const Node>(Node{ExprOp::Constant, value, {}}));
}

Expr Expr::variable() {
  return Expr(std::make_shared<const Node>(Node{ExprOp::Variable, 0.0, {}}));
}

Expr Expr::unary(ExprOp op, Expr arg) {
  return Expr(std::make_shared<const Node>(Node{op, 0.0, {arg.root_}}));
}

Expr Expr::binary(ExprOp op, Expr lhs, Expr rhs) {
  return Expr(std::make_shared<const Node>(Node{op, 0.0, {lhs.root_, rhs.root_}}));
}

double Expr::eval(double x) const {
  if (std::isnan(x)) throw DomainError(to_string(), x, "NaN input");
  return eval_node(*this, x);
}

Expr::LogAbs Expr::eval_log_abs(double x) const {
  if (std::isnan(x)) throw DomainError(to_string(), x, "NaN input");
  return log_abs_node(*this, x);
}

std::string Expr::to_string() const {
  switch (op()) {
    case ExprOp::Constant:
      return format_number(constant_value());
    case ExprOp::Variable:
      return "t";
    case ExprOp::Negate:
      return "(-" + arg(0).to_string() + ")";
    case ExprOp::Add:
    case ExprOp::Subtract:
    case ExprOp::Multiply:
    case ExprOp::Divide:
    case ExprOp::Power:
      return "(" + arg(0).to_string() + expr_op_name(op()) + arg(1).to_string() + ")";
    case ExprOp::Min:
    case ExprOp::Max:
      return std::string(expr_op_name(op())) + "(" + arg(0).to_string() + "," +
             arg(1).to_string() + ")";
    default:
      return std::string(expr_op_name(op())) + "(" + arg(0).to_string() + ")";
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.root_ == b.root_) return true;
  if (!a.root_ || !b.root_) return false;
  if (a.op() != b.op() || a.arity() != b.arity()) return false;
  if (a.op() == ExprOp::Constant && a.constant_value() != b.constant_value()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!(a.arg(i) == b.arg(i))) return false;
  }
  return true;
}

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

const char* expr_op_name(ExprOp op) {
  switch (op) {
    case ExprOp::Constant: return "const";
    case ExprOp::Variable: return "t";
    case ExprOp::Negate: return "-";
    case ExprOp::Add: return "+";
    case ExprOp::Subtract: return "-";
    case ExprOp::Multiply: return "*";
    case ExprOp::Divide: return "/";
    case ExprOp::Power: return "^";
    case ExprOp::Exp: return "exp";
    case ExprOp::Log: return "log";
    case ExprOp::Abs: return "abs";
    case ExprOp::Sgn: return "sgn";
    case ExprOp::Sqrt: return "sqrt";
    case ExprOp::Min: return "min";
    case ExprOp::Max: return "max";
  }
  return "?";
}

}  // namespace muspec
