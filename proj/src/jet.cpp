#include "lagspace/jet.hpp"

#include <array>
#include <cmath>
#include <string>

#include "lagspace/errors.hpp"

namespace lagspace {

namespace {

Var var_of_slot(int slot, int dim) {
  return slot < dim ? Var::base(slot + 1) : Var::fiber(slot - dim + 1);
}

}  // namespace

Jet3 jet3(const LagrangianField& L, const TangentPoint& u, int max_order) {
  const int n = L.dimension();
  const int m = 2 * n;
  if (u.dim() != n) throw std::invalid_argument("point dimension does not match the Lagrangian");

  Jet3 jet;
  jet.dim = n;
  jet.point = u;
  jet.value = L(u);
  jet.d1 = Eigen::VectorXd::Zero(m);
  jet.d2 = Eigen::MatrixXd::Zero(m, m);
  jet.d3.assign(m, Eigen::MatrixXd::Zero(m, m));

  if (max_order >= 1) {
    for (int a = 0; a < m; ++a) {
      const std::array<Var, 1> vars{var_of_slot(a, n)};
      jet.d1(a) = L.partial(vars, u);
    }
  }
  if (max_order >= 2) {
    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) {
        const std::array<Var, 2> vars{var_of_slot(a, n), var_of_slot(b, n)};
        double v = L.partial(vars, u);
        jet.d2(a, b) = v;
        jet.d2(b, a) = v;
      }
    }
  }
  if (max_order >= 3) {
    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) {
        for (int c = b; c < m; ++c) {
          const std::array<Var, 3> vars{var_of_slot(a, n), var_of_slot(b, n), var_of_slot(c, n)};
          double v = L.partial(vars, u);
          jet.d3[a](b, c) = v;
          jet.d3[a](c, b) = v;
          jet.d3[b](a, c) = v;
          jet.d3[b](c, a) = v;
          jet.d3[c](a, b) = v;
          jet.d3[c](b, a) = v;
        }
      }
    }
  }
  return jet;
}

namespace {

// Nested central differences with one step for the whole stencil. Every
// stencil point must stay off the zero section.
double fd_recurse(const LagrangianField& L, const TangentPoint& u, std::span<const Var> vars,
                  double h) {
  if (vars.empty()) return L(u);
  const Var v = vars.front();
  const std::span<const Var> rest = vars.subspan(1);

  auto shifted = [&](double sign) {
    Eigen::VectorXd x = u.x;
    Eigen::VectorXd y = u.y;
    if (v.kind == Var::Kind::Base) {
      x(v.index - 1) += sign * h;
    } else {
      y(v.index - 1) += sign * h;
    }
    if (y.isZero(0.0)) {
      throw EvalDomainError("finite-difference stencil crossed the zero section");
    }
    return TangentPoint(std::move(x), std::move(y));
  };

  return (fd_recurse(L, shifted(+1.0), rest, h) - fd_recurse(L, shifted(-1.0), rest, h)) /
         (2.0 * h);
}

}  // namespace

double fd_partial(const LagrangianField& L, const TangentPoint& u, std::span<const Var> vars,
                  const FdConfig& cfg) {
  if (vars.empty() || vars.size() > 3) {
    throw std::invalid_argument("finite differences cover orders 1 through 3");
  }
  return fd_recurse(L, u, vars, cfg.step_for(static_cast<int>(vars.size())));
}

double fd_partial(const LagrangianField& L, const TangentPoint& u, std::initializer_list<Var> vars,
                  const FdConfig& cfg) {
  return fd_partial(L, u, std::span<const Var>(vars.begin(), vars.size()), cfg);
}

CheckResult validate_jets(const LagrangianField& L, std::span<const TangentPoint> points,
                          const FdConfig& cfg) {
  const int n = L.dimension();
  const int m = 2 * n;
  CheckResult check;
  check.name = "jets-vs-finite-differences";
  check.tolerance = cfg.tolerance;

  for (const TangentPoint& u : points) {
    double worst = 0.0;
    try {
      const Jet3 jet = jet3(L, u);
      auto compare = [&](double exact, double approx) {
        double rel = std::abs(exact - approx) / std::max(1.0, std::abs(exact));
        worst = std::max(worst, rel);
      };
      for (int a = 0; a < m; ++a) {
        const std::array<Var, 1> v1{var_of_slot(a, n)};
        compare(jet.d1(a), fd_partial(L, u, v1, cfg));
      }
      for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
          const std::array<Var, 2> v2{var_of_slot(a, n), var_of_slot(b, n)};
          compare(jet.d2(a, b), fd_partial(L, u, v2, cfg));
        }
      }
      for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
          for (int c = b; c < m; ++c) {
            const std::array<Var, 3> v3{var_of_slot(a, n), var_of_slot(b, n), var_of_slot(c, n)};
            compare(jet.d3_at(a, b, c), fd_partial(L, u, v3, cfg));
          }
        }
      }
    } catch (const EvalDomainError& err) {
      check.skip_point(std::string("domain failure: ") + err.what());
      continue;
    }
    check.record(worst);
  }
  return check.finish();
}

}  // namespace lagspace
