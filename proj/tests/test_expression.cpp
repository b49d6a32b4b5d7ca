#include "mixop/errors.hpp"
#include "mixop/expression.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mixop;

namespace {

Point vec(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p(i++) = x;
  return p;
}

std::string parse_error(const std::string& text, int dimension) {
  try {
    Expression::parse(text, dimension);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("expression") {
  TEST_CASE("examples") {
    CHECK(expression_eval("1", vec({0.3})) == 1.0);
    CHECK(expression_eval("x1*x1 + x2", vec({2, 3})) == 7.0);
    CHECK(expression_eval("sin(x1)", vec({std::numbers::pi / 2})) == doctest::Approx(1.0));
    CHECK(Expression::parse("2 * pi", 1).is_constant());
    CHECK_FALSE(Expression::parse("x1", 1).is_constant());
  }

  TEST_CASE("precedence and associativity") {
    const Point x = vec({2.0});
    CHECK(expression_eval("1 + 2 * 3", x) == 7.0);
    CHECK(expression_eval("2 ^ 3 ^ 2", x) == 512.0);
    CHECK(expression_eval("-x1^2", x) == -4.0);
    CHECK(expression_eval("(1 + 2) * 3", x) == 9.0);
    CHECK(expression_eval("8 / 4 / 2", x) == 1.0);
    CHECK(expression_eval("10 - 4 - 3", x) == 3.0);
    CHECK(expression_eval("2e-1 + 1.5E1", x) == doctest::Approx(15.2));
  }

  TEST_CASE("functions and constants") {
    const Point x = vec({-0.5, 4.0});
    CHECK(expression_eval("abs(x1) + sqrt(x2)", x) == 2.5);
    CHECK(expression_eval("max(x1, x2) - min(x1, x2)", x) == 4.5);
    CHECK(expression_eval("pow(x2, 0.5)", x) == 2.0);
    CHECK(expression_eval("log(e)", x) == doctest::Approx(1.0));
    CHECK(expression_eval("exp(0) + cos(0) + tanh(0) + tan(0)", x) == 2.0);
  }

  TEST_CASE("field adapter evaluates at points") {
    const Field f = Expression::parse("x1 * x2", 2).field();
    CHECK(f(vec({3, 5})) == 15.0);
  }

  TEST_CASE("errors report the position") {
    CHECK(parse_error("x1 + foo(2)", 1).find("unknown identifier") != std::string::npos);
    CHECK(parse_error("x1 + foo(2)", 1).find("at position 5") != std::string::npos);
    CHECK(parse_error("max(1)", 1).find("takes 2 argument(s), got 1") != std::string::npos);
    CHECK(parse_error("x3", 2).find("outside 1..2") != std::string::npos);
    CHECK(parse_error("(1 + 2", 1).find("at position") != std::string::npos);
    CHECK(parse_error("1 +", 1).find("at position") != std::string::npos);
    CHECK(parse_error("1 2", 1).find("at position") != std::string::npos);
    CHECK(parse_error("", 1) != "");
  }
}
