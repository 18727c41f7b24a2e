#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "corpus.hpp"
#include "lagspace/errors.hpp"
#include "lagspace/expr.hpp"
#include "lagspace/field.hpp"
#include "lagspace/sampling.hpp"

using namespace lagspace;

namespace {

TangentPoint pt(double x1, double x2, double y1, double y2) {
  Eigen::VectorXd x(2), y(2);
  x << x1, x2;
  y << y1, y2;
  return TangentPoint(x, y);
}

TangentPoint pt1(double x1, double y1) {
  Eigen::VectorXd x(1), y(1);
  x << x1;
  y << y1;
  return TangentPoint(x, y);
}

// Expressions exercising every node kind; evaluated away from the domain
// boundaries of log/sqrt/division.
const std::vector<std::string>& ast_corpus() {
  static const std::vector<std::string> texts = {
      "y1^2 + y2^2",
      "y1^2 + y2^2 + 2*x1*y1",
      "y1^2 + x1^2*y2^2",
      "(y1^2 + y2^2)^2",
      "sin(x1)*y1 + cos(x2)*y2^2",
      "exp(x1/4)*y1^2 + log(x1 + 3)*y2^2",
      "sqrt(x1 + 3)*y1^2 + y2^2/(x2 + 5)",
      "y1^3/(y2^2 + 1) - x1*x2*y1",
  };
  return texts;
}

}  // namespace

TEST_CASE("parse maps the grammar onto arithmetic") {
  ExprPtr flat = parse_expression("y1^2 + y2^2", 2);
  CHECK(evaluate(flat, pt(0, 0, 3, 4)) == doctest::Approx(25.0));

  ExprPtr pert = parse_expression("y1^2 + y2^2 + 2*x1*y1", 2);
  CHECK(evaluate(pert, pt(1, 2, 3, 4)) == doctest::Approx(31.0));

  // precedence: ^ above unary minus above * and /
  CHECK(evaluate(parse_expression("-y1^2", 1), pt1(0, 3)) == doctest::Approx(-9.0));
  CHECK(evaluate(parse_expression("2*3 + 4", 1), pt1(1, 1)) == doctest::Approx(10.0));
  CHECK(evaluate(parse_expression("2 + 3*4", 1), pt1(1, 1)) == doctest::Approx(14.0));
  CHECK(evaluate(parse_expression("8/4/2", 1), pt1(1, 1)) == doctest::Approx(1.0));
  CHECK(evaluate(parse_expression("2^3^2", 1), pt1(1, 1)) == doctest::Approx(64.0));  // left assoc
  CHECK(evaluate(parse_expression("y1^-2", 1), pt1(0, 2)) == doctest::Approx(0.25));
  CHECK(evaluate(parse_expression("1.5e2 + x1", 1), pt1(2, 1)) == doctest::Approx(152.0));
}

TEST_CASE("parse reports errors with positions") {
  CHECK_THROWS_AS(parse_expression("y3", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("x0", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("y1 +", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("tan(x1)", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("y1^x1", 2), ParseError);  // variable exponent
  CHECK_THROWS_AS(parse_expression("(y1", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("y1 y2", 2), ParseError);

  try {
    parse_expression("y1 + y3", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position == 5);
  }
}

TEST_CASE("evaluate raises domain errors with the offending subexpression") {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
  TangentPoint origin(x, y);
  CHECK_THROWS_AS(evaluate(parse_expression("log(x1)", 1), origin), EvalDomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("sqrt(x1 - 1)", 1), origin), EvalDomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("y1/x1", 1), origin), EvalDomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("x1^-1", 1), origin), EvalDomainError);

  try {
    evaluate(parse_expression("y1 + log(x1)", 1), origin);
  } catch (const EvalDomainError& e) {
    CHECK(std::string(e.what()).find("log(x1)") != std::string::npos);
  }
}

TEST_CASE("differentiate: polynomial rules and mixed partials") {
  ExprPtr e = parse_expression("y1^2 + 2*x1*y1", 2);
  ExprPtr d = differentiate(e, Var::fiber(1));
  // d/dy1 = 2 y1 + 2 x1
  CHECK(evaluate(d, pt(3, 0, 5, 1)) == doctest::Approx(16.0));

  ExprPtr cross = parse_expression("2*x1*y1", 2);
  ExprPtr dxy = differentiate(differentiate(cross, Var::base(1)), Var::fiber(1));
  ExprPtr dyx = differentiate(differentiate(cross, Var::fiber(1)), Var::base(1));
  CHECK(evaluate(dxy, pt(1, 1, 1, 1)) == doctest::Approx(2.0));
  CHECK(evaluate(dyx, pt(1, 1, 1, 1)) == doctest::Approx(2.0));

  ExprPtr polar = parse_expression("x1^2*y2^2", 2);
  CHECK(evaluate(differentiate(polar, Var::fiber(2)), pt(1, 0, 0.5, 1)) == doctest::Approx(2.0));
}

TEST_CASE("mixed partials commute on the whole corpus") {
  SplitMix64 rng(41);
  SampleBox box = SampleBox::cube(2, 0.5, 2.0);  // well inside every domain
  const std::vector<Var> vars = {Var::base(1), Var::base(2), Var::fiber(1), Var::fiber(2)};
  for (const auto& text : ast_corpus()) {
    ExprPtr e = parse_expression(text, 2);
    for (Var a : vars) {
      for (Var b : vars) {
        ExprPtr ab = differentiate(differentiate(e, a), b);
        ExprPtr ba = differentiate(differentiate(e, b), a);
        for (int i = 0; i < 10; ++i) {
          TangentPoint u = sample_point(rng, box);
          double va = evaluate(ab, u);
          double vb = evaluate(ba, u);
          CHECK(std::abs(va - vb) <= 1e-12 * (1.0 + std::abs(va)));
        }
      }
    }
  }
}

TEST_CASE("symbolic derivatives agree with central finite differences") {
  SplitMix64 rng(7);
  SampleBox box = SampleBox::cube(2, 0.5, 2.0);
  const double h = 1e-5;
  const std::vector<Var> vars = {Var::base(1), Var::base(2), Var::fiber(1), Var::fiber(2)};
  for (const auto& text : ast_corpus()) {
    ExprPtr e = parse_expression(text, 2);
    for (Var v : vars) {
      ExprPtr d = differentiate(e, v);
      for (int i = 0; i < 5; ++i) {
        TangentPoint u = sample_point(rng, box);
        Eigen::VectorXd xp = u.x, xm = u.x, yp = u.y, ym = u.y;
        if (v.kind == Var::Kind::Base) {
          xp(v.index - 1) += h;
          xm(v.index - 1) -= h;
        } else {
          yp(v.index - 1) += h;
          ym(v.index - 1) -= h;
        }
        double fd = (evaluate(e, TangentPoint(xp, yp)) - evaluate(e, TangentPoint(xm, ym))) /
                    (2.0 * h);
        double exact = evaluate(d, u);
        CHECK(std::abs(exact - fd) <= 1e-6 * (1.0 + std::abs(exact)));
      }
    }
  }
}

TEST_CASE("simplify folds constants and keeps evaluation equality") {
  CHECK(to_string(simplify(parse_expression("0*y1 + y2", 2))) == "y2");
  CHECK(to_string(simplify(parse_expression("2*3", 1))) == "6");
  CHECK(to_string(simplify(parse_expression("1*y1 + 0", 1))) == "y1");

  SplitMix64 rng(11);
  SampleBox box = SampleBox::cube(2, 0.5, 2.0);
  for (const auto& text : ast_corpus()) {
    ExprPtr e = parse_expression(text, 2);
    ExprPtr d = differentiate(e, Var::fiber(1));
    ExprPtr s = simplify(d);
    for (int i = 0; i < 100; ++i) {
      TangentPoint u = sample_point(rng, box);
      double a = evaluate(d, u);
      double b = evaluate(s, u);
      CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
    }
  }
}

TEST_CASE("print round-trips through the parser") {
  SplitMix64 rng(13);
  SampleBox box = SampleBox::cube(2, 0.5, 2.0);
  for (const auto& text : ast_corpus()) {
    ExprPtr once = parse_expression(text, 2);
    ExprPtr twice = parse_expression(to_string(once), 2);
    // also the derivative trees, which use every constructor
    ExprPtr donce = differentiate(once, Var::fiber(2));
    ExprPtr dtwice = parse_expression(to_string(donce), 2);
    for (int i = 0; i < 20; ++i) {
      TangentPoint u = sample_point(rng, box);
      CHECK(evaluate(once, u) == doctest::Approx(evaluate(twice, u)).epsilon(1e-12));
      CHECK(evaluate(donce, u) == doctest::Approx(evaluate(dtwice, u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("field validates dimensions and memoizes derivatives") {
  CHECK_THROWS_AS(parse_lagrangian("y3", 2), ParseError);
  LagrangianField L = parse_lagrangian("y1^2 + 2*x1*y1", 2);
  CHECK(L.dimension() == 2);
  CHECK(L(pt(1, 2, 3, 4)) == doctest::Approx(9 + 6));
  const std::vector<Var> dd = {Var::base(1), Var::fiber(1)};
  CHECK(L.partial(dd, pt(1, 2, 3, 4)) == doctest::Approx(2.0));
  // same key twice returns the identical cached tree
  CHECK(L.derivative(dd) == L.derivative(dd));
}
