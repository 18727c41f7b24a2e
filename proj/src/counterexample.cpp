#include "lagspace/counterexample.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "lagspace/errors.hpp"
#include "lagspace/geometry.hpp"

namespace lagspace {

namespace {

// Entries and potentials depend on x only; evaluation still needs a point
// off the zero section, so a unit fiber is attached.
double eval_base(const ExprPtr& e, const Eigen::VectorXd& x) {
  return evaluate(e, TangentPoint(x, Eigen::VectorXd::Ones(x.size())));
}

}  // namespace

Eigen::MatrixXd evaluate_metric(const RiemannianMetricSpec& a, const Eigen::VectorXd& x) {
  const int n = a.dim;
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = eval_base(a.entries[i][j], x);
  return out;
}

bool metric_positive_definite(const RiemannianMetricSpec& a, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd metric = evaluate_metric(a, x);
  for (int k = 1; k <= a.dim; ++k) {
    if (!(metric.topLeftCorner(k, k).determinant() > 0.0)) return false;
  }
  return true;
}

std::vector<Eigen::MatrixXd> christoffel_symbols(const RiemannianMetricSpec& a,
                                                 const Eigen::VectorXd& x) {
  const int n = a.dim;
  const Eigen::MatrixXd metric = evaluate_metric(a, x);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(metric);
  const double scale = metric.cwiseAbs().maxCoeff();
  if (!(std::abs(lu.determinant()) > 1e-10 * std::pow(scale, n))) {
    throw DegenerateLagrangian("Riemannian metric is singular at the requested base point");
  }
  const Eigen::MatrixXd inv = lu.inverse();

  // da[k](i, j) = d a_ij / dx^k
  std::vector<Eigen::MatrixXd> da(n, Eigen::MatrixXd(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        da[k](i, j) = eval_base(differentiate(a.entries[i][j], Var::base(k + 1)), x);

  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) {
          acc += inv(i, l) * (da[k](l, j) + da[j](l, k) - da[l](j, k));
        }
        gamma[i](j, k) = 0.5 * acc;
      }
    }
  }
  return gamma;
}

LagrangianField build_riemannian_quadratic(const RiemannianMetricSpec& a) {
  const int n = a.dim;
  std::vector<ExprPtr> terms;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      terms.push_back(product({a.entries[i][j], fiber_var(i + 1), fiber_var(j + 1)}));
    }
  }
  return LagrangianField(simplify(sum(std::move(terms))), n, a.name + "-quadratic");
}

LagrangianField perturb_with_gradient(const RiemannianMetricSpec& a, const PotentialSpec& phi) {
  const int n = a.dim;
  std::vector<ExprPtr> terms{build_riemannian_quadratic(a).expression()};
  for (int i = 0; i < n; ++i) {
    terms.push_back(product({differentiate(phi.phi, Var::base(i + 1)), fiber_var(i + 1)}));
  }
  return LagrangianField(simplify(sum(std::move(terms))), n, a.name + "-perturbed");
}

Eigen::MatrixXd obstruction_tensor(const RiemannianMetricSpec& a, const PotentialSpec& phi,
                                   const Eigen::VectorXd& x) {
  const int n = a.dim;
  const std::vector<Eigen::MatrixXd> gamma = christoffel_symbols(a, x);

  Eigen::VectorXd dphi(n);
  for (int k = 0; k < n; ++k) dphi(k) = eval_base(differentiate(phi.phi, Var::base(k + 1)), x);

  Eigen::MatrixXd t(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const ExprPtr second =
          differentiate(differentiate(phi.phi, Var::base(i + 1)), Var::base(j + 1));
      double acc = eval_base(second, x);
      for (int k = 0; k < n; ++k) acc -= gamma[k](i, j) * dphi(k);
      t(i, j) = acc;
    }
  }
  return t;
}

Eigen::VectorXd dhl_closed_form(const RiemannianMetricSpec& a, const PotentialSpec& phi,
                                const TangentPoint& u) {
  return obstruction_tensor(a, phi, u.x) * u.y;
}

std::vector<CheckResult> compare_structures(const LagrangianField& base,
                                            const LagrangianField& perturbed,
                                            std::span<const TangentPoint> points, double tol) {
  CheckResult omega_check{.name = "shared-cartan-two-form", .tolerance = tol};
  CheckResult spray_check{.name = "shared-semispray", .tolerance = tol};
  CheckResult connection_check{.name = "shared-connection", .tolerance = tol};

  for (const TangentPoint& u : points) {
    try {
      const GeometryBundle lhs = geometry_at(base, u);
      const GeometryBundle rhs = geometry_at(perturbed, u);
      const double omega_scale = 1.0 + lhs.omega.cwiseAbs().maxCoeff();
      omega_check.record((lhs.omega - rhs.omega).cwiseAbs().maxCoeff() / omega_scale);
      spray_check.record((lhs.spray - rhs.spray).cwiseAbs().maxCoeff() /
                         (1.0 + lhs.spray.cwiseAbs().maxCoeff()));
      connection_check.record((lhs.connection - rhs.connection).cwiseAbs().maxCoeff() /
                              (1.0 + lhs.connection.cwiseAbs().maxCoeff()));
    } catch (const EvalDomainError& e) {
      omega_check.skip_point(e.what());
      spray_check.skip_point(e.what());
      connection_check.skip_point(e.what());
    } catch (const DegenerateLagrangian& e) {
      omega_check.skip_point(e.what());
      spray_check.skip_point(e.what());
      connection_check.skip_point(e.what());
    }
  }
  return {omega_check.finish(), spray_check.finish(), connection_check.finish()};
}

EquivalenceProbe equivalence_probe(const LagrangianField& L, std::span<const TangentPoint> points,
                                   double tol) {
  EquivalenceProbe probe;
  probe.tolerance = tol;
  for (const TangentPoint& u : points) {
    const GeometryBundle bundle = geometry_at(L, u);
    ProbeRow row;
    row.spray_derivative = bundle.spray_derivative;
    row.dh_max = bundle.dh.cwiseAbs().maxCoeff();
    row.spray_zero = std::abs(row.spray_derivative) <= tol;
    row.dh_zero = row.dh_max <= tol;
    if (row.spray_zero && row.dh_zero) {
      ++probe.both_zero;
    } else if (row.spray_zero) {
      ++probe.spray_zero_only;
    } else if (row.dh_zero) {
      ++probe.dh_zero_only;
    } else {
      ++probe.both_nonzero;
    }
    probe.rows.push_back(row);
  }
  return probe;
}

namespace {

RiemannianMetricSpec flat_metric() {
  RiemannianMetricSpec a;
  a.dim = 2;
  a.name = "flat";
  a.entries = {{constant(1.0), constant(0.0)}, {constant(0.0), constant(1.0)}};
  a.box = SampleBox::cube(2);
  return a;
}

// diag(1, x1^2): the Euclidean plane in polar coordinates, regular for
// x1 > 0. Sampling keeps x1 in [0.5, 2].
RiemannianMetricSpec polar_metric() {
  RiemannianMetricSpec a;
  a.dim = 2;
  a.name = "polar";
  a.entries = {{constant(1.0), constant(0.0)},
               {constant(0.0), power(base_var(1), 2.0)}};
  a.box = SampleBox::cube(2);
  a.box.x_lo(0) = 0.5;
  a.box.x_hi(0) = 2.0;
  return a;
}

std::vector<CounterexampleFamily> make_families() {
  std::vector<CounterexampleFamily> families;
  // Flat metric, nonlinear potential: the Hessian of phi survives.
  families.push_back({"flat-quadratic-phi", flat_metric(),
                      PotentialSpec{power(base_var(1), 2.0)}, true});
  // Curved metric, linear potential: the Christoffel term survives.
  families.push_back({"polar-linear-phi", polar_metric(), PotentialSpec{base_var(2)}, true});
  // Flat metric, linear potential: both obstruction terms vanish.
  families.push_back({"null-control", flat_metric(),
                      PotentialSpec{sum({base_var(1), product({constant(2.0), base_var(2)})})},
                      false});
  // No perturbation at all: the homogeneous quadratic Lagrangian itself.
  families.push_back({"homogeneous-control", polar_metric(), PotentialSpec{constant(0.0)}, false});
  return families;
}

}  // namespace

const std::vector<CounterexampleFamily>& builtin_families() {
  static const std::vector<CounterexampleFamily> families = make_families();
  return families;
}

const CounterexampleFamily* find_family(std::string_view name) {
  for (const CounterexampleFamily& f : builtin_families()) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

}  // namespace lagspace
