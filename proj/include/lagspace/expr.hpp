#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lagspace/point.hpp"

namespace lagspace {

// Scalar expressions over the chart variables x1..xn (base) and y1..yn
// (fiber). Trees are immutable and shared; every operation below is a pure
// function, so concurrent use needs no coordination.

enum class UnaryFn { Neg, Sin, Cos, Exp, Log, Sqrt };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Constant {
  double value;
};
struct BaseVar {
  int index;  // x^i, 1-based
};
struct FiberVar {
  int index;  // y^i, 1-based
};
struct Sum {
  std::vector<ExprPtr> terms;
};
struct Product {
  std::vector<ExprPtr> factors;
};
struct Quotient {
  ExprPtr num;
  ExprPtr den;
};
struct Power {
  ExprPtr base;
  double exponent;  // always a constant; the grammar enforces this
};
struct Unary {
  UnaryFn fn;
  ExprPtr arg;
};

struct Expr {
  std::variant<Constant, BaseVar, FiberVar, Sum, Product, Quotient, Power, Unary> node;
};

// Node factories. sum/product drop exact zero/one operands so derivative
// trees stay a manageable size; everything else is built as written.
ExprPtr constant(double value);
ExprPtr base_var(int index);
ExprPtr fiber_var(int index);
ExprPtr sum(std::vector<ExprPtr> terms);
ExprPtr product(std::vector<ExprPtr> factors);
ExprPtr quotient(ExprPtr num, ExprPtr den);
ExprPtr power(ExprPtr base, double exponent);
ExprPtr unary(UnaryFn fn, ExprPtr arg);

// Differentiation variable: one of x^i, y^i (1-based index).
struct Var {
  enum class Kind { Base, Fiber };
  Kind kind;
  int index;

  static Var base(int i) { return {Kind::Base, i}; }
  static Var fiber(int i) { return {Kind::Fiber, i}; }
  bool operator==(const Var&) const = default;
};

// Parses the infix grammar (see docs/grammar.md). Variable indices are
// checked against dim. Throws ParseError.
ExprPtr parse_expression(std::string_view text, int dim);

// Exact symbolic derivative; total on valid input.
ExprPtr differentiate(const ExprPtr& e, Var v);

// Arithmetic value at u. Throws EvalDomainError when a partial function is
// applied outside its domain.
double evaluate(const ExprPtr& e, const TangentPoint& u);

// Constant folding and zero/one elimination only; evaluation-equal to the
// input at every valid point of the input.
ExprPtr simplify(const ExprPtr& e);

// Infix form that reparses to an evaluation-equal tree.
std::string to_string(const ExprPtr& e);

// Largest variable index referenced (0 when the tree is constant).
int max_variable_index(const ExprPtr& e);

}  // namespace lagspace
