// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "plex/expression.hpp"

using namespace plex;

namespace {

double ev(const std::string& text, double x = 0.0, std::vector<double> w = {}, double s = 0.0) {
  return Expression::parse(text).eval({x, w, s});
}

// Random expression generator over the full grammar.
std::string random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 3);
  switch (pick(rng)) {
    case 0:
      return "x";
    case 1:
      return "w" + std::to_string(1 + rng() % 2);
    case 2:
      return std::to_string(rng() % 7) + "." + std::to_string(rng() % 100);
    case 3:
      return "pi";
    case 4:
      return random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1);
    case 5:
      return random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1);
    case 6:
      return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
    case 7:
      return "-" + random_expr(rng, depth - 1);
    case 8: {
      static const char* fns[] = {"sin", "cos", "exp", "abs"};
      return std::string(fns[rng() % 4]) + "(" + random_expr(rng, depth - 1) + ")";
    }
    default:
      return "(" + random_expr(rng, depth - 1) + ")^2";
  }
}

}  // namespace

TEST_CASE("precedence and associativity") {
  CHECK(ev("2+3*4") == 14.0);
  CHECK(ev("2*3+4") == 10.0);
  CHECK(ev("10-4-3") == 3.0);
  CHECK(ev("64/4/2") == 8.0);
  CHECK(ev("2^3^2") == 512.0);  // right-associative
  CHECK(ev("-2^2") == -4.0);    // ^ binds tighter than unary minus
  CHECK(ev("2^-1") == 0.5);
  CHECK(ev("(2+3)*4") == 20.0);
  CHECK(ev("--3") == 3.0);
  CHECK(ev("1e-3*1000") == doctest::Approx(1.0));
}

TEST_CASE("functions and variables") {
  CHECK(ev("sin(2*pi*x)", 0.25) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ev("1", 0.7, {0.1}) == 1.0);
  CHECK(ev("2+cos(2*pi*w1)", 0.37, {0.0}) == 3.0);
  CHECK(ev("sin(pi*x)*cos(2*pi*w1)", 0.5, {0.5}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(ev("abs(x)", -2.5) == 2.5);
  CHECK(ev("exp(0)") == 1.0);
  CHECK(ev("s*2", 0.0, {}, 1.5) == 3.0);
  CHECK(ev("w2 - w1", 0.0, {0.25, 0.75}) == 0.5);
}

TEST_CASE("division by zero is an evaluation error") {
  CHECK_THROWS_WITH_AS(ev("1/(x-x)", 0.3), doctest::Contains("division by zero"), EvalError);
  const Expression e = Expression::parse("1/(x-x)");
  BatchEvaluator be;
  std::vector<double> xs = {0.1, 0.2}, out(2);
  CHECK_THROWS_AS(be.eval(e, xs, {}, 0.0, out), EvalError);
}

TEST_CASE("syntax errors carry a position, unknown identifiers their name") {
  try {
    Expression::parse("1 + * 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
  CHECK_THROWS_WITH_AS(Expression::parse("foo(x)"), doctest::Contains("foo"), ParseError);
  CHECK_THROWS_WITH_AS(Expression::parse("x + y"), doctest::Contains("y"), ParseError);
  CHECK_THROWS_AS(Expression::parse(""), ParseError);
  CHECK_THROWS_AS(Expression::parse("(1 + 2"), ParseError);
  CHECK_THROWS_AS(Expression::parse("w0"), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 2"), ParseError);
}

TEST_CASE("metadata: torus index, x and s usage, literal zero") {
  const Expression e = Expression::parse("w3*x + s");
  CHECK(e.max_w_index() == 3);
  CHECK(e.uses_x());
  CHECK(e.uses_s());
  CHECK(e.depends_on_flow());
  CHECK(Expression::parse("0").is_identically_zero());
  CHECK_FALSE(Expression::parse("x - x").is_identically_zero());
  CHECK_FALSE(Expression::parse("x").depends_on_flow());
  CHECK_THROWS_AS(e.eval({0.5, std::vector<double>{0.1, 0.2}, 0.0}), EvalError);
}

TEST_CASE("unparse round-trip evaluates identically (property)") {
  std::mt19937 rng(2024);
  const std::vector<double> w = {0.21, 0.83};
  for (int k = 0; k < 300; ++k) {
    const std::string text = random_expr(rng, 4);
    CAPTURE(text);
    const Expression e = Expression::parse(text);
    const Expression back = Expression::parse(e.unparse());
    CHECK(back.unparse() == e.unparse());
    for (double x : {0.0, 0.3, 0.99}) {
      const double v1 = e.eval({x, w, 0.0});
      const double v2 = back.eval({x, w, 0.0});
      if (std::isnan(v1))
        CHECK(std::isnan(v2));
      else
        CHECK(std::memcmp(&v1, &v2, sizeof(double)) == 0);
    }
  }
}

TEST_CASE("evaluation is deterministic") {
  const Expression e1 = Expression::parse("1 + 0.5*cos(2*pi*w1)*sin(pi*x)^2");
  const Expression e2 = Expression::parse("1 + 0.5*cos(2*pi*w1)*sin(pi*x)^2");
  const std::vector<double> w = {0.123};
  for (double x = 0.0; x <= 1.0; x += 0.01) CHECK(e1.eval({x, w, 0}) == e2.eval({x, w, 0}));
}
