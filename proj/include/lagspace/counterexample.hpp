#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lagspace/field.hpp"
#include "lagspace/report.hpp"
#include "lagspace/sampling.hpp"

namespace lagspace {

// Riemannian metric a_ij(x) with entries given as expressions in the base
// variables only. Positive definiteness is spot-checked at sample points,
// not proven.
struct RiemannianMetricSpec {
  int dim = 0;
  std::vector<std::vector<ExprPtr>> entries;  // symmetric table
  SampleBox box;                              // where the metric is regular
  std::string name;
};

// Potential phi(x) on the base manifold; the perturbation added to the
// quadratic Lagrangian is its complete lift (dphi/dx^i) y^i.
struct PotentialSpec {
  ExprPtr phi;  // base variables only; zero potential allowed
};

Eigen::MatrixXd evaluate_metric(const RiemannianMetricSpec& a, const Eigen::VectorXd& x);

// Leading-principal-minor test at one base point. Positive definiteness is
// only ever spot-checked at samples, never proven symbolically.
bool metric_positive_definite(const RiemannianMetricSpec& a, const Eigen::VectorXd& x);

// Christoffel symbols of the second kind, gamma[i](j, k); symmetric in (j, k).
std::vector<Eigen::MatrixXd> christoffel_symbols(const RiemannianMetricSpec& a,
                                                 const Eigen::VectorXd& x);

// L'(x, y) = a_ij(x) y^i y^j, second order homogeneous and regular wherever
// a is.
LagrangianField build_riemannian_quadratic(const RiemannianMetricSpec& a);

// L = L' + (dphi/dx^i) y^i. The y-linear perturbation leaves the metric
// tensor, the Cartan 2-form, the spray and the connection untouched.
LagrangianField perturb_with_gradient(const RiemannianMetricSpec& a, const PotentialSpec& phi);

// T_ij = d^2 phi/dx^i dx^j - gamma^k_ij dphi/dx^k. A nonzero entry witnesses
// d_hL != 0 for the perturbed Lagrangian.
Eigen::MatrixXd obstruction_tensor(const RiemannianMetricSpec& a, const PotentialSpec& phi,
                                   const Eigen::VectorXd& x);

// Closed form of the horizontal differential for the perturbed family:
// L_{|i} = T_ij y^j. Cross-validates the jet-based computation.
Eigen::VectorXd dhl_closed_form(const RiemannianMetricSpec& a, const PotentialSpec& phi,
                                const TangentPoint& u);

// Residuals of ||omega_L - omega_L'||, ||G_L - G_L'||, ||N_L - N_L'|| over
// the points; the perturbed pair must share all three structures.
std::vector<CheckResult> compare_structures(const LagrangianField& base,
                                            const LagrangianField& perturbed,
                                            std::span<const TangentPoint> points,
                                            double tol = 1e-8);

// Pointwise co-occurrence of S(L) = 0 and d_hL = 0 over a sample set. Only
// observed evidence; no universal statement is made.
struct ProbeRow {
  double spray_derivative = 0.0;
  double dh_max = 0.0;
  bool spray_zero = false;
  bool dh_zero = false;
};

struct EquivalenceProbe {
  double tolerance = 0.0;
  int both_zero = 0;
  int spray_zero_only = 0;
  int dh_zero_only = 0;
  int both_nonzero = 0;
  std::vector<ProbeRow> rows;
};

EquivalenceProbe equivalence_probe(const LagrangianField& L, std::span<const TangentPoint> points,
                                   double tol = 1e-8);

// Built-in (a, phi) families: the two witness-producing examples plus the
// two controls.
struct CounterexampleFamily {
  std::string name;
  RiemannianMetricSpec metric;
  PotentialSpec potential;
  bool expects_witness = false;  // max |L_{|i}| must exceed 0.1 somewhere
};

const std::vector<CounterexampleFamily>& builtin_families();
const CounterexampleFamily* find_family(std::string_view name);

}  // namespace lagspace
