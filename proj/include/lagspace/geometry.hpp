#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>

#include "lagspace/jet.hpp"
#include "lagspace/report.hpp"
#include "lagspace/sampling.hpp"

namespace lagspace {

// Residual scaled by the magnitude of both sides, so tolerances are
// meaningful across sample boxes: |a - b| / (1 + |a| + |b|).
inline double scaled_residual(double a, double b) {
  return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
}

// Fiber metric g_ij = (1/2) d^2L/dy^i dy^j with inverse and determinant.
struct Metric {
  Eigen::MatrixXd g;
  Eigen::MatrixXd g_inv;
  double det = 0.0;
};

// Throws DegenerateLagrangian when |det g| <= 1e-10 (max |g_ij|)^n.
Metric metric_tensor(const Jet3& jet);

// Cartan 1-form components theta_i = dL/dy^i.
Eigen::VectorXd cartan_one_form(const Jet3& jet);

// theta_L pairs a tangent vector of TM through its base components only;
// vertical vectors are in the kernel.
double one_form_pairing(const Eigen::VectorXd& theta, const Eigen::VectorXd& vec2n);

// Cartan 2-form in the natural basis (dx^1..dx^n, dy^1..dy^n):
//   omega = 2 g_ij dy^j ^ dx^i + (1/2)(L_{y^i x^j} - L_{x^i y^j}) dx^j ^ dx^i
// with Omega(a,b) = omega(e_a, e_b) and (alpha^beta)(u,v) =
// alpha(u)beta(v) - alpha(v)beta(u).
Eigen::MatrixXd cartan_two_form_natural(const Jet3& jet);

// Spray coefficients G^i = (1/4) g^{ik} (L_{y^k x^h} y^h - L_{x^k}).
Eigen::VectorXd semispray_coeffs(const Jet3& jet, const Metric& metric);
Eigen::VectorXd semispray_coeffs(const Jet3& jet);

// Connection coefficients N^i_j = dG^i/dy^j, expanded exactly through the
// jet (third-order partials and the derivative of the inverse metric).
Eigen::MatrixXd connection_coeffs(const Jet3& jet, const Metric& metric);
Eigen::MatrixXd connection_coeffs(const Jet3& jet);

// dG^i/dx^j, same expansion with base derivatives; used by the bracket
// formulas below.
Eigen::MatrixXd semispray_coeffs_base_gradient(const Jet3& jet, const Metric& metric);

// Horizontal projector in the natural basis: (X, Y) -> (X, -N X).
Eigen::MatrixXd horizontal_projector_matrix(const Eigen::MatrixXd& connection);

// Energy E_L = C(L) - L with C the Liouville field y^i d/dy^i.
double energy(const Jet3& jet);

// S(L) = y^i L_{x^i} - 2 G^i L_{y^i}.
double semispray_derivative(const Jet3& jet, const Eigen::VectorXd& spray);
double semispray_derivative(const Jet3& jet);

// Components of the horizontal differential: L_{|i} = L_{x^i} - N^j_i L_{y^j}.
Eigen::VectorXd horizontal_differential(const Jet3& jet, const Eigen::MatrixXd& connection);
Eigen::VectorXd horizontal_differential(const Jet3& jet);

// d(S(L))/dy^i expanded by the product rule over the spray coefficient
// formula: L_{x^i} + y^j L_{x^j y^i} - 4 g_ij G^j - 2 N^j_i L_{y^j}.
Eigen::VectorXd spray_derivative_fiber_gradient(const Jet3& jet);

// The covector i_S omega_L in the natural basis.
Eigen::VectorXd semispray_contraction(const Eigen::MatrixXd& omega, const Eigen::VectorXd& spray,
                                      const Eigen::VectorXd& fiber);

// d(L - C(L)) in the natural basis.
Eigen::VectorXd energy_codifferential(const Jet3& jet);

// Everything derived at one point.
struct GeometryBundle {
  TangentPoint point;
  Jet3 jet;
  Metric metric;
  Eigen::VectorXd spray;        // G^i
  Eigen::MatrixXd connection;   // N^i_j
  Eigen::VectorXd theta;        // Cartan 1-form
  Eigen::MatrixXd omega;        // Cartan 2-form, natural basis
  Eigen::MatrixXd projector;    // horizontal projector h
  double energy = 0.0;          // E_L
  double spray_derivative = 0.0;  // S(L)
  Eigen::VectorXd dh;           // L_{|i}
};

GeometryBundle geometry_at(const LagrangianField& L, const TangentPoint& u);

// Euler detection: C(L)/L constant over the sample set within tol means L
// is homogeneous of that order in y. Points with L = 0 are skipped.
struct HomogeneityResult {
  std::optional<double> degree;
  double max_deviation = 0.0;
  int points_used = 0;
  int points_skipped = 0;
};
HomogeneityResult homogeneity_degree(const LagrangianField& L, std::span<const TangentPoint> points,
                                     double tol = 1e-8);

// --- identity checks over point sweeps -------------------------------------

// h from Grifone's bracket formula h(X) = (X - [S,JX] + J[S,X])/2, applied
// to the natural frame, against the block form.
CheckResult grifone_projector_check(const LagrangianField& L, std::span<const TangentPoint> points,
                                    double tol = 1e-8);

// theta_L(S) = C(L) and (Lie_S theta_L)(X) = dL(X) on constant-coefficient
// test vectors.
CheckResult check_cartan_form_identities(const LagrangianField& L,
                                         std::span<const TangentPoint> points,
                                         int vectors_per_point, SplitMix64& rng,
                                         double tol = 1e-8);

// Defining equation of the spray: i_S omega_L = d(L - C(L)), componentwise
// and against sampled vectors.
CheckResult check_isomega(const LagrangianField& L, std::span<const TangentPoint> points,
                          int vectors_per_point, SplitMix64& rng, double tol = 1e-8);

// L_{|i} = (1/2) d(S(L))/dy^i, both sides from exact jet data.
CheckResult check_horizontal_differential_identity(const LagrangianField& L,
                                                   std::span<const TangentPoint> points,
                                                   double tol = 1e-8);

// omega_L(hX, hY) = 0 on sampled pairs, plus reconstruction of the natural
// matrix from the adapted form 2 g_ij delta-y^j ^ dx^i.
CheckResult check_lagrangian_subbundle(const LagrangianField& L,
                                       std::span<const TangentPoint> points, int pairs_per_point,
                                       SplitMix64& rng, double tol = 1e-8);

// For L homogeneous of order k != 1: S(L) = 0, d_hL = 0, and
// i_S omega_L = (1 - k) dL. Skipped when no degree is detected.
CheckResult check_homogeneous_laws(const LagrangianField& L, std::span<const TangentPoint> points,
                                   double tol = 1e-8, double homogeneity_tol = 1e-8);

// --- full suite --------------------------------------------------------------

struct SuiteConfig {
  int sample_count = 50;
  int vectors_per_point = 10;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
  FdConfig fd{};
};

// Samples points from the box and runs every identity check in a fixed
// order. Fully deterministic for a fixed seed.
IdentityReport run_identity_suite(const LagrangianField& L, const SampleBox& box,
                                  const SuiteConfig& cfg);

}  // namespace lagspace
