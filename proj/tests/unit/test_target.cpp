#include <doctest.h>

#include <cmath>
#include <numbers>

#include "certapprox/errors.hpp"
#include "certapprox/target.hpp"

using namespace certapprox;

TEST_CASE("target: parse tree") {
  const auto e = parse_expression("sin(pi*x)");
  REQUIRE(e->op == ExprOp::Sin);
  REQUIRE(e->lhs->op == ExprOp::Mul);
  CHECK(e->lhs->lhs->op == ExprOp::Pi);
  CHECK(e->lhs->rhs->op == ExprOp::Var);
}

TEST_CASE("target: right associative power") {
  CHECK(evaluate_expr(parse_expression("2^3^2"), 0.7) == 512.0);
  CHECK(evaluate_expr(parse_expression("-x^2"), 3.0) == -9.0);
  CHECK(evaluate_expr(parse_expression("1 - 2 - 3"), 0.0) == -4.0);
  CHECK(evaluate_expr(parse_expression("8 / 2 / 2"), 0.0) == 2.0);
}

TEST_CASE("target: syntax errors carry the offset") {
  try {
    parse_expression("x +");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 3);
    CHECK_FALSE(e.expected().empty());
  }
  CHECK_THROWS_AS(parse_expression("sin x"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("(x"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("x y"), SyntaxError);
}

TEST_CASE("target: rendering re-parses to the same tree") {
  for (const char* text : {"sin(pi*x)", "-x^2+3*x/(1+x)", "exp(-abs(x-0.5))", "2^3^2", "sqrt(x)*log(1+x)"}) {
    const auto a = parse_expression(text);
    CHECK(structurally_equal(a, parse_expression(to_string(a))));
  }
}

TEST_CASE("target: builtins and samples") {
  CHECK(evaluate(TargetFunction::builtin("runge"), 0.0) == 1.0);
  const auto pl = TargetFunction::piecewise_linear({0.0, 1.0}, {0.0, 1.0});
  CHECK(evaluate(pl, 0.25) == 0.25);
  const auto tent = TargetFunction::piecewise_linear({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
  CHECK(evaluate_deriv(tent, 0.25) == 2.0);
  CHECK(evaluate(tent, 0.75) == 0.5);
  CHECK(evaluate(tent_partial_sum(3), 0.0) == 0.0);
}

TEST_CASE("target: derivatives") {
  const auto s = TargetFunction::expression("sin(pi*x)", {0.0, 1.0});
  CHECK(evaluate_deriv(s, 0.0) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(evaluate_deriv(TargetFunction::expression("x^2", {0.0, 4.0}), 3.0) == doctest::Approx(6.0));
  const auto g = TargetFunction::expression("exp(x)*cos(x)", {0.0, 2.0});
  const double h = 1e-6;
  for (double x : {0.2, 0.9, 1.7}) {
    const double fd = (evaluate(g, x + h) - evaluate(g, x - h)) / (2 * h);
    CHECK(evaluate_deriv(g, x) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("target: evaluation errors") {
  CHECK_THROWS_AS(evaluate(TargetFunction::expression("log(x)", {0.0, 1.0}), 0.0), EvaluationError);
  CHECK_THROWS_AS(evaluate(TargetFunction::expression("x", {0.0, 1.0}), 1.5), DomainError);
}

TEST_CASE("target: sample text") {
  const auto f = parse_samples("# identity\n0 0\n1 1\n", "data:inline");
  CHECK(evaluate(f, 0.3) == doctest::Approx(0.3));
  CHECK(f.domain() == Interval{0.0, 1.0});
  try {
    parse_samples("1 0\n0 1\n", "data:bad");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_samples("0 0\n", "data:short"), FormatError);
  CHECK_THROWS_AS(parse_samples("0 0\n1 abc\n", "data:nan"), FormatError);
  const auto t = parse_samples("0 0\n0.5 1\n1 0\n", "data:tent");
  CHECK(evaluate(t, 0.5 * 0.5) == doctest::Approx(0.5));
}

TEST_CASE("target: spec strings") {
  CHECK(parse_target_spec("builtin:sinpi").descriptor() == "builtin:sinpi");
  const Interval d{-1.0, 1.0};
  const auto e = parse_target_spec("expr:exp(x)", &d);
  CHECK(e.domain() == d);
  CHECK(evaluate(e, -1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS(parse_target_spec("nonsense"));
}
