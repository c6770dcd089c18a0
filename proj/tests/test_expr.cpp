#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "nws/expr.hpp"

using namespace nws;
using Catch::Approx;

namespace {
double val(const std::string& text, double t) {
  EvalResult r = evaluate(parse_expr(text, {"t"}), {{"t", t}});
  REQUIRE_FALSE(r.pole);
  return r.value;
}
}  // namespace

TEST_CASE("grammar, precedence, associativity", "[expr]") {
  CHECK(val("3*(2*t+1)^2", 1.0) == Approx(27.0));
  CHECK(val("1-2-3", 0.0) == Approx(-4.0));
  CHECK(val("6/2/3", 0.0) == Approx(1.0));
  CHECK(val("2^3^2", 0.0) == Approx(512.0));  // right-associative
  CHECK(val("-t^2", 2.0) == Approx(-4.0));    // minus binds after the power
  CHECK(val("2*t^2", 3.0) == Approx(18.0));
  CHECK(val("exp(ln(5))", 0.0) == Approx(5.0));
  CHECK(val("2*pi", 0.0) == Approx(6.283185307179586));
  CHECK(val("e^2", 0.0) == Approx(7.38905609893065));
  CHECK(val("1e3 + 2.5e-2", 0.0) == Approx(1000.025));
  CHECK(val("coth(2)", 0.0) == Approx(1.0373147207275482).epsilon(1e-14));
  CHECK(val("tanh(1)", 0.0) == Approx(0.7615941559557649).epsilon(1e-14));
}

TEST_CASE("derivatives of the grammar examples", "[expr]") {
  Expr e = parse_expr("3*(2*t+1)^2", {"t"});
  Expr d = differentiate(e, "t");
  CHECK(evaluate(d, {{"t", 1.0}}).value == Approx(36.0));
  Expr abs_e = parse_expr("abs(t-2)", {"t"});
  Expr abs_d = differentiate(abs_e, "t");
  CHECK(evaluate(abs_d, {{"t", 3.0}}).value == Approx(1.0));
  CHECK(evaluate(abs_d, {{"t", 1.0}}).value == Approx(-1.0));
}

TEST_CASE("undeclared variables and syntax failures", "[expr]") {
  try {
    parse_expr("t+y", {"t"});
    FAIL("expected an undeclared-variable failure");
  } catch (const UndeclaredVariableError& e) {
    CHECK(e.name == "y");
  }
  CHECK_THROWS_AS(parse_expr("2*", {"t"}), SyntaxError);
  CHECK_THROWS_AS(parse_expr("(t+1", {"t"}), SyntaxError);
  CHECK_THROWS_AS(parse_expr("t 2", {"t"}), SyntaxError);
  CHECK_THROWS_AS(parse_expr("", {"t"}), SyntaxError);
  // "foo" sits in function position, so it is a grammar failure rather than an
  // undeclared variable
  CHECK_THROWS_AS(parse_expr("foo(t)", {"t"}), SyntaxError);
}

TEST_CASE("pole markers instead of junk values", "[expr]") {
  auto pole_at = [](const std::string& text, double t) {
    EvalResult r = evaluate(parse_expr(text, {"t"}), {{"t", t}});
    REQUIRE(r.pole);
    CHECK_FALSE(r.pole_at.empty());
  };
  pole_at("1/(t-1)", 1.0);
  pole_at("(t-1)/(t-1)", 1.0);
  pole_at("ln(t)", -2.0);
  pole_at("ln(t)", 0.0);
  pole_at("sqrt(t)", -1.0);
  pole_at("coth(t)", 0.0);
  pole_at("t^(-1)", 0.0);
  pole_at("(t-5)^0.5", 1.0);  // negative base, fractional exponent
  pole_at("exp(t)", 1.0e6);   // overflow is a pole, not inf

  EvalResult ok = evaluate(parse_expr("t^(-1)", {"t"}), {{"t", 4.0}});
  CHECK_FALSE(ok.pole);
  CHECK(ok.value == Approx(0.25));
}

TEST_CASE("derivatives agree with central differences", "[expr]") {
  std::vector<std::string> corpus = {
      "sin(2*t)*exp(t/3)",
      "t^3 - 4*t + 1/(t+3)",
      "tanh(t)*ln(t+4)",
      "sqrt(t+2)^3",
      "cos(t)^2/(2+sin(t))",
      "abs(t-0.5)*t^2",
      "coth(t+2)",
      "t^t",
      "exp(-t^2)*sin(t)",
      "(2*t+1)^(-2)",
  };
  for (const auto& text : corpus) {
    Expr e = parse_expr(text, {"t"});
    Expr d = differentiate(e, "t");
    for (int i = 0; i < 100; ++i) {
      double t = 1.0 + 0.01 * i;
      double h = 1e-6 * (1.0 + std::fabs(t));
      EvalResult lo = evaluate(e, {{"t", t - h}});
      EvalResult hi = evaluate(e, {{"t", t + h}});
      EvalResult an = evaluate(d, {{"t", t}});
      REQUIRE_FALSE(lo.pole);
      REQUIRE_FALSE(hi.pole);
      REQUIRE_FALSE(an.pole);
      double fd = (hi.value - lo.value) / (2.0 * h);
      INFO(text << " at t = " << t);
      CHECK(std::fabs(fd - an.value) <= 2e-6 * (1.0 + std::fabs(an.value)));
    }
  }
}

TEST_CASE("print and reparse round-trips", "[expr]") {
  std::vector<std::string> corpus = {
      "3*(2*t+1)^2", "-t^2", "1-2-3", "t^t",        "1/(t-1)",
      "sin(2*t)",    "2^t",  "-(t+1)", "t/(2*(t+1))", "abs(t)-t",
  };
  for (const auto& text : corpus) {
    Expr e = parse_expr(text, {"t"});
    std::string printed = to_text(e);
    Expr back = parse_expr(printed, {"t"});
    INFO(text << " -> " << printed);
    CHECK(structurally_equal(e, back));
    for (double t : {0.3, 1.7, 2.9}) {
      EvalResult r1 = evaluate(e, {{"t", t}});
      EvalResult r2 = evaluate(back, {{"t", t}});
      CHECK(r1.pole == r2.pole);
      if (!r1.pole) CHECK(r1.value == Approx(r2.value).epsilon(1e-15));
    }
  }
}

TEST_CASE("differentiation is linear", "[expr]") {
  Expr f = parse_expr("sin(2*t)*exp(t/3)", {"t"});
  Expr g = parse_expr("t^3 - 4*t", {"t"});
  Expr combo = 2.5 * f - 3.0 * g;
  Expr lhs = differentiate(combo, "t");
  Expr rhs = 2.5 * differentiate(f, "t") - 3.0 * differentiate(g, "t");
  Box box;
  box.add("t", -2.0, 2.0);
  CHECK(is_identically_zero(lhs - rhs, box));
}

namespace {
struct CorpusItem {
  std::string text;
  double lo, hi;
};
}  // namespace

TEST_CASE("identity corpus is recognized as zero", "[expr]") {
  std::vector<CorpusItem> identities = {
      {"sin(t)^2 + cos(t)^2 - 1", -3.0, 3.0},
      {"cosh(t)^2 - sinh(t)^2 - 1", -2.0, 2.0},
      {"tanh(t) - sinh(t)/cosh(t)", -3.0, 3.0},
      {"coth(t) - cosh(t)/sinh(t)", 0.2, 3.0},
      {"exp(ln(t)) - t", 0.1, 4.0},
      {"ln(exp(t)) - t", -3.0, 3.0},
      {"sqrt(t^2) - abs(t)", -2.0, 2.0},
      {"sin(2*t) - 2*sin(t)*cos(t)", -3.0, 3.0},
      {"cos(2*t) - 1 + 2*sin(t)^2", -3.0, 3.0},
      {"(t+1)^2 - t^2 - 2*t - 1", -3.0, 3.0},
      {"t^3 - 1 - (t-1)*(t^2+t+1)", -3.0, 3.0},
      {"tan(t) - sin(t)/cos(t)", -1.2, 1.2},
      {"sinh(2*t) - 2*sinh(t)*cosh(t)", -2.0, 2.0},
      {"ln(t^2) - 2*ln(t)", 0.1, 4.0},
      {"(e^t)^2 - e^(2*t)", -2.0, 2.0},
      {"1/(1/t) - t", 0.2, 3.0},
      {"abs(t)*abs(t) - t^2", -2.0, 2.0},
      {"cosh(t) + sinh(t) - exp(t)", -2.0, 2.0},
      {"(t^2-4)/(t-2) - t - 2", 2.5, 5.0},
      {"sqrt(t)*sqrt(t) - t", 0.1, 4.0},
      {"1e12*sin(t)^2 + 1e12*cos(t)^2 - 1e12", -3.0, 3.0},
  };
  for (const auto& item : identities) {
    Expr e = parse_expr(item.text, {"t"});
    Box box;
    box.add("t", item.lo, item.hi);
    INFO(item.text);
    CHECK(is_identically_zero(e, box));
  }
}

TEST_CASE("perturbed corpus is rejected", "[expr]") {
  std::vector<CorpusItem> frauds = {
      {"sin(t)^2 + cos(t)^2 - 0.999", -3.0, 3.0},
      {"cosh(t)^2 - sinh(t)^2 - 1.0001", -2.0, 2.0},
      {"tanh(t) - sinh(t)/cosh(t) + 0.001*t", -3.0, 3.0},
      {"coth(t) - cosh(t)/sinh(t) - 1e-4", 0.2, 3.0},
      {"exp(ln(t)) - 1.0001*t", 0.1, 4.0},
      {"ln(exp(t)) - t - 1e-5", -3.0, 3.0},
      {"sqrt(t^2) - t", -2.0, -0.5},
      {"sin(2*t) - 2.0001*sin(t)*cos(t)", -3.0, 3.0},
      {"cos(2*t) - 1 + 1.998*sin(t)^2", -3.0, 3.0},
      {"(t+1)^2 - t^2 - 2*t - 0.99", -3.0, 3.0},
      {"t^3 - 1 - (t-1)*(t^2+t+2)", -3.0, 3.0},
      {"tan(t) - sin(t)/cos(t) + 1e-4", -1.2, 1.2},
      {"sinh(2*t) - 2*sinh(t)*cosh(t) + 1e-3", -2.0, 2.0},
      {"ln(t^2) - 2.001*ln(t)", 0.1, 0.9},
      {"(e^t)^2 - e^(2.0001*t)", 1.0, 2.0},
      {"1/(1/t) - t - 1e-6", 0.2, 3.0},
      {"abs(t)*abs(t) - t^2 - 1e-7", -2.0, 2.0},
      {"cosh(t) + sinh(t) - exp(t) + 1e-6*t^2", -2.0, 2.0},
      {"(t^2-4)/(t-2) - t - 2.0001", 2.5, 5.0},
      {"sqrt(t)*sqrt(t) - 0.9999*t", 0.5, 4.0},
  };
  for (const auto& item : frauds) {
    Expr e = parse_expr(item.text, {"t"});
    Box box;
    box.add("t", item.lo, item.hi);
    INFO(item.text);
    CHECK_FALSE(is_identically_zero(e, box));
  }
}

TEST_CASE("zero test is deterministic per seed and inconclusive on pole fields", "[expr]") {
  Expr e = parse_expr("sin(t)^2 + cos(t)^2 - 1", {"t"});
  Box box;
  box.add("t", -3.0, 3.0);
  ZeroTestOptions opt;
  ZeroTestReport r1 = zero_test(e, box, opt);
  ZeroTestReport r2 = zero_test(e, box, opt);
  CHECK(r1.max_scaled == r2.max_scaled);
  CHECK(r1.accepted == r2.accepted);

  opt.seed = 7;
  ZeroTestReport r3 = zero_test(e, box, opt);
  CHECK(r3.zero);

  Expr always_pole = parse_expr("sqrt(-1 - t^2)", {"t"});
  CHECK_THROWS_AS(zero_test(always_pole, box, opt), InconclusiveError);
}

TEST_CASE("multivariate expressions and evaluation points", "[expr]") {
  Expr e = parse_expr("exp(t+y) - exp(t)*exp(y)", {"t", "y"});
  Box box;
  box.add("t", -1.5, 1.5).add("y", -1.5, 1.5);
  CHECK(is_identically_zero(e, box));
  Expr g = parse_expr("t*y^2", {"t", "y"});
  CHECK(evaluate(g, {{"t", 3.0}, {"y", 2.0}}).value == Approx(12.0));
  CHECK(evaluate(differentiate(g, "y"), {{"t", 3.0}, {"y", 2.0}}).value == Approx(12.0));
}
