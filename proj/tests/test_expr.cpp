#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "muspec/errors.hpp"
#include "muspec/expr.hpp"
#include "oracles.hpp"

using namespace muspec;

TEST_CASE("coefficient of the two-abs system parses to mul(2, abs(var))") {
  const Expr e = parse_expr("2*abs(t)");
  REQUIRE(e.op() == ExprOp::Multiply);
  CHECK(e.arg(0).op() == ExprOp::Constant);
  CHECK(e.arg(0).constant_value() == 2.0);
  CHECK(e.arg(1).op() == ExprOp::Abs);
  CHECK(e.arg(1).arg(0).op() == ExprOp::Variable);
}

TEST_CASE("log of the quadratic rate evaluates like its formula") {
  const Expr e = parse_expr("sgn(t)*t^2");
  for (double t : {-7.5, -2.0, -0.25, 0.0, 0.5, 3.0, 11.0}) {
    CHECK(e.eval(t) == doctest::Approx(oracle::log_q(t)).epsilon(1e-15));
  }
}

TEST_CASE("syntax errors carry offset and expected tokens") {
  try {
    parse_expr("3*t^^2");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 4);
    CHECK_FALSE(e.expected().empty());
  }
  CHECK_THROWS_AS(parse_expr("2t"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("foo(t)"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("x+1"), SyntaxError);
  CHECK_THROWS_AS(parse_expr(""), SyntaxError);
  CHECK_THROWS_AS(parse_expr("(t"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("min(t)"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("exp(t,1)"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("t 1"), SyntaxError);
}

TEST_CASE("evaluation of the frak coefficient and friends") {
  CHECK(parse_expr("exp(-3*k^2-3*k-1)").eval(0) == doctest::Approx(std::exp(-1.0)));
  CHECK(parse_expr("exp(-3*k^2-3*k-1)").eval(0) == doctest::Approx(0.36788).epsilon(1e-5));
  CHECK(parse_expr("sgn(t)").eval(0) == 0.0);
  CHECK(parse_expr("sgn(t)").eval(-3) == -1.0);
  CHECK(parse_expr("3*t^2").eval(2) == 12.0);
  CHECK(parse_expr("min(t, 2) + max(t, 2)").eval(5) == 7.0);
  CHECK(parse_expr("sqrt(t)").eval(9) == 3.0);
  CHECK(parse_expr("  1 +\t2 * 3 ").eval(0) == 7.0);
  CHECK(parse_expr("2^3^2").eval(0) == 512.0);
  CHECK(parse_expr("-2^2").eval(0) == -4.0);
  CHECK(parse_expr("1.5e2").eval(0) == 150.0);
  CHECK(parse_expr("(-2)^3").eval(0) == -8.0);
}

TEST_CASE("domain errors name the sub-expression and the input") {
  auto domain = [](const char* text, double x) {
    try {
      parse_expr(text).eval(x);
    } catch (const DomainError& e) {
      return std::make_pair(e.subexpression(), e.input());
    }
    return std::make_pair(std::string("no error"), 0.0);
  };
  auto [sub, in] = domain("1 + log(t)", -2);
  CHECK(sub.find("log") != std::string::npos);
  CHECK(in == -2);
  CHECK(domain("sqrt(t)", -1).first != "no error");
  CHECK(domain("1/t", 0).first != "no error");
  CHECK(domain("t^0.5", -4).first != "no error");
  CHECK(domain("exp(exp(t))", 10).first != "no error");
}

TEST_CASE("overflow safe log-abs evaluation") {
  const Expr e = parse_expr("exp(-3*k^2-3*k-1)");
  const auto r = e.eval_log_abs(300);
  CHECK(r.sign == 1);
  CHECK(r.log_abs == doctest::Approx(-3.0 * 300 * 300 - 3.0 * 300 - 1));
  const auto z = parse_expr("t*0").eval_log_abs(4);
  CHECK(z.sign == 0);
  CHECK(std::isinf(z.log_abs));
  const auto neg = parse_expr("-2*exp(t)").eval_log_abs(1000);
  CHECK(neg.sign == -1);
  CHECK(neg.log_abs == doctest::Approx(std::log(2.0) + 1000));
}

namespace {

// Random well-formed expression text over the full grammar.
std::string random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 13);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  switch (pick(rng)) {
    case 0: return "t";
    case 1: return "k";
    case 2: {
      const double v = std::round(val(rng) * 100) / 100;
      return v < 0 ? "(" + std::to_string(v) + ")" : std::to_string(v);
    }
    case 3: return random_expr(rng, depth - 1) + "+" + random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) + "-" + random_expr(rng, depth - 1);
    case 5: return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
    case 6: return random_expr(rng, depth - 1) + "/" + random_expr(rng, depth - 1);
    case 7: return "(" + random_expr(rng, depth - 1) + ")^" + random_expr(rng, 0);
    case 8: return "-" + random_expr(rng, depth - 1);
    case 9: return "exp(" + random_expr(rng, depth - 1) + ")";
    case 10: return "log(" + random_expr(rng, depth - 1) + ")";
    case 11: return "sqrt(" + random_expr(rng, depth - 1) + ")";
    case 12: return "abs(" + random_expr(rng, depth - 1) + ")*sgn(" + random_expr(rng, depth - 1) + ")";
    default: return "max(" + random_expr(rng, depth - 1) + "," + random_expr(rng, depth - 1) + ")";
  }
}

}  // namespace

TEST_CASE("printing round trips through the parser") {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    const std::string text = random_expr(rng, 4);
    const Expr first = parse_expr(text);
    const Expr again = parse_expr(first.to_string());
    INFO(text);
    CHECK(again == first);
    CHECK(parse_expr(again.to_string()) == again);
  }
}

TEST_CASE("random expressions never abort: finite value or a reported domain error") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> x(-10.0, 10.0);
  int values = 0;
  int domain = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string text = random_expr(rng, 5);
    const Expr e = parse_expr(text);
    const double at = x(rng);
    try {
      const double v = e.eval(at);
      INFO(text);
      CHECK(std::isfinite(v));
      ++values;
    } catch (const DomainError&) {
      ++domain;
    }
  }
  CHECK(values + domain == 1000);
  CHECK(values > 0);
}

TEST_CASE("precedence: a+b*c equals a+(b*c)") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> v(-100.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    const std::string a = std::to_string(std::fabs(v(rng)));
    const std::string b = std::to_string(std::fabs(v(rng)));
    const std::string c = std::to_string(std::fabs(v(rng)));
    CHECK(parse_expr(a + "+" + b + "*" + c).eval(0) == parse_expr(a + "+(" + b + "*" + c + ")").eval(0));
    CHECK(parse_expr(a + "-" + b + "/" + c).eval(0) == parse_expr(a + "-(" + b + "/" + c + ")").eval(0));
  }
}

TEST_CASE("evaluation is bitwise deterministic") {
  const Expr e = parse_expr("log(1+abs(t))*sqrt(abs(t))/3");
  for (double t = -5; t <= 5; t += 0.37) {
    const double a = e.eval(t);
    const double b = e.eval(t);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  }
}
