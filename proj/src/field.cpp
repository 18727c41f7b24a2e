#include "lagspace/field.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace lagspace {

namespace {

int slot_of(Var v, int dim) {
  if (v.index < 1 || v.index > dim) throw std::invalid_argument("derivative variable index out of range");
  return v.kind == Var::Kind::Base ? v.index - 1 : dim + v.index - 1;
}

Var var_of_slot(int slot, int dim) {
  return slot < dim ? Var::base(slot + 1) : Var::fiber(slot - dim + 1);
}

}  // namespace

LagrangianField::LagrangianField(ExprPtr expr, int dim, std::string name)
    : expr_(std::move(expr)), dim_(dim), name_(std::move(name)) {
  if (dim_ < 1) throw std::invalid_argument("dimension must be at least 1");
  if (max_variable_index(expr_) > dim_) {
    throw std::invalid_argument("expression references a variable index beyond the dimension");
  }
}

ExprPtr LagrangianField::derivative_by_key(const std::vector<int>& key) const {
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ExprPtr result;
  if (key.empty()) {
    result = expr_;
  } else {
    std::vector<int> prefix(key.begin(), key.end() - 1);
    ExprPtr lower = derivative_by_key(prefix);
    result = simplify(differentiate(lower, var_of_slot(key.back(), dim_)));
  }
  cache_.emplace(key, result);
  return result;
}

ExprPtr LagrangianField::derivative(std::span<const Var> vars) const {
  std::vector<int> key;
  key.reserve(vars.size());
  for (Var v : vars) key.push_back(slot_of(v, dim_));
  std::sort(key.begin(), key.end());
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return derivative_by_key(key);
}

double LagrangianField::partial(std::span<const Var> vars, const TangentPoint& u) const {
  return evaluate(derivative(vars), u);
}

double LagrangianField::partial(std::initializer_list<Var> vars, const TangentPoint& u) const {
  return partial(std::span<const Var>(vars.begin(), vars.size()), u);
}

LagrangianField parse_lagrangian(std::string_view text, int dim, std::string name) {
  return LagrangianField(parse_expression(text, dim), dim, std::move(name));
}

}  // namespace lagspace
