#pragma once

#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lagspace/expr.hpp"
#include "lagspace/point.hpp"

namespace lagspace {

// A Lagrangian L(x, y) backed by an expression tree, with exact symbolic
// partial derivatives of any order. Derivatives are computed lazily per
// sorted multi-index and cached; the cache is mutex-guarded so fields can be
// shared across threads.
class LagrangianField {
 public:
  LagrangianField(ExprPtr expr, int dim, std::string name = "L");

  int dimension() const { return dim_; }
  const std::string& name() const { return name_; }
  const ExprPtr& expression() const { return expr_; }

  double operator()(const TangentPoint& u) const { return evaluate(expr_, u); }

  // Mixed partial d^k L / dv_1 ... dv_k evaluated at u.
  double partial(std::span<const Var> vars, const TangentPoint& u) const;
  double partial(std::initializer_list<Var> vars, const TangentPoint& u) const;

  // The cached symbolic derivative for the (order-insensitive) multi-index.
  ExprPtr derivative(std::span<const Var> vars) const;

 private:
  ExprPtr derivative_by_key(const std::vector<int>& key) const;

  ExprPtr expr_;
  int dim_;
  std::string name_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::vector<int>, ExprPtr> cache_;  // key: sorted slots in [0, 2n)
};

// Parses text against the DSL grammar and wraps it as a field.
LagrangianField parse_lagrangian(std::string_view text, int dim, std::string name = "L");

}  // namespace lagspace
