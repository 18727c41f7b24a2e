#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "lagspace/field.hpp"
#include "lagspace/report.hpp"

namespace lagspace {

// All partial derivatives of L at a point through third order. Slots are
// ordered (x^1..x^n, y^1..y^n); storage is fully redundant, so d2 and d3
// are symmetric in their indices by construction.
struct Jet3 {
  int dim = 0;  // n
  TangentPoint point;
  double value = 0.0;
  Eigen::VectorXd d1;               // 2n
  Eigen::MatrixXd d2;               // 2n x 2n
  std::vector<Eigen::MatrixXd> d3;  // d3[a](b, c), 2n slices

  int xslot(int i) const { return i; }        // 0-based base index
  int yslot(int i) const { return dim + i; }  // 0-based fiber index
  double d3_at(int a, int b, int c) const { return d3[a](b, c); }
};

// Evaluates the memoized symbolic partials of L at u. Each distinct mixed
// partial is evaluated once and mirrored over all index permutations.
// max_order below 3 leaves the higher tensors zero (used by integrators
// that only need the spray).
Jet3 jet3(const LagrangianField& L, const TangentPoint& u, int max_order = 3);

// Central-difference oracle, independent of the symbolic path. The step is
// chosen by the total order of the requested partial; the scheme is the
// nested central difference, with O(h^2) truncation error.
struct FdConfig {
  double step1 = 1e-5;
  double step2 = 1e-4;
  double step3 = 1e-3;
  double tolerance = 1e-5;  // relative, floored at magnitude 1

  double step_for(int order) const { return order <= 1 ? step1 : (order == 2 ? step2 : step3); }
};

double fd_partial(const LagrangianField& L, const TangentPoint& u, std::span<const Var> vars,
                  const FdConfig& cfg = {});
double fd_partial(const LagrangianField& L, const TangentPoint& u, std::initializer_list<Var> vars,
                  const FdConfig& cfg = {});

// Compares every partial of jet3 against the finite-difference oracle over
// the given points. Per-point domain failures are recorded, not thrown.
CheckResult validate_jets(const LagrangianField& L, std::span<const TangentPoint> points,
                          const FdConfig& cfg = {});

}  // namespace lagspace
