#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "lagspace/counterexample.hpp"
#include "lagspace/geometry.hpp"

using namespace lagspace;

namespace {

TangentPoint pt(double x1, double x2, double y1, double y2) {
  Eigen::VectorXd x(2), y(2);
  x << x1, x2;
  y << y1, y2;
  return TangentPoint(x, y);
}

Eigen::VectorXd base(double x1, double x2) {
  Eigen::VectorXd x(2);
  x << x1, x2;
  return x;
}

const CounterexampleFamily& family(std::string_view name) {
  const CounterexampleFamily* f = find_family(name);
  REQUIRE(f != nullptr);
  return *f;
}

}  // namespace

TEST_CASE("christoffel symbols of the flat and polar metrics") {
  const auto& flat = family("flat-quadratic-phi").metric;
  auto gamma_flat = christoffel_symbols(flat, base(0.7, -1.2));
  for (const auto& slice : gamma_flat) CHECK(slice.cwiseAbs().maxCoeff() == 0.0);

  const auto& polar = family("polar-linear-phi").metric;
  auto gamma = christoffel_symbols(polar, base(2, 0.3));
  CHECK(gamma[0](1, 1) == doctest::Approx(-2.0));  // gamma^1_22 = -x1
  CHECK(gamma[1](0, 1) == doctest::Approx(0.5));   // gamma^2_12 = 1/x1
  CHECK(gamma[1](1, 0) == doctest::Approx(0.5));
  CHECK(gamma[0](0, 0) == 0.0);
  CHECK(gamma[0](0, 1) == 0.0);
  CHECK(gamma[1](0, 0) == 0.0);
  CHECK(gamma[1](1, 1) == 0.0);
}

TEST_CASE("every family metric is positive definite over its sampling box") {
  SplitMix64 rng(2);
  for (const auto& fam : builtin_families()) {
    for (int i = 0; i < 25; ++i) {
      TangentPoint u = sample_point(rng, fam.metric.box);
      CHECK(metric_positive_definite(fam.metric, u.x));
    }
  }
  // the polar metric degenerates on the x1 = 0 axis
  const auto& polar = family("polar-linear-phi").metric;
  CHECK(!metric_positive_definite(polar, base(0, 1)));
}

TEST_CASE("christoffel symmetry in the lower indices") {
  const auto& polar = family("polar-linear-phi").metric;
  SplitMix64 rng(3);
  for (int i = 0; i < 10; ++i) {
    TangentPoint u = sample_point(rng, polar.box);
    auto gamma = christoffel_symbols(polar, u.x);
    for (const auto& slice : gamma) {
      CHECK((slice - slice.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("spray of the quadratic Lagrangian is the geodesic spray") {
  // 2 G^i = gamma^i_jk y^j y^k at random points
  const auto& polar = family("polar-linear-phi").metric;
  LagrangianField L = build_riemannian_quadratic(polar);
  SplitMix64 rng(5);
  for (int i = 0; i < 20; ++i) {
    TangentPoint u = sample_point(rng, polar.box);
    Eigen::VectorXd spray2 = 2.0 * semispray_coeffs(jet3(L, u));
    auto gamma = christoffel_symbols(polar, u.x);
    for (int k = 0; k < 2; ++k) {
      double quad = u.y.dot(gamma[k] * u.y);
      CHECK(std::abs(spray2(k) - quad) <= 1e-8 * (1.0 + std::abs(quad)));
    }
  }
}

TEST_CASE("build_riemannian_quadratic reproduces the metric and is 2-homogeneous") {
  const auto& polar = family("polar-linear-phi").metric;
  LagrangianField L = build_riemannian_quadratic(polar);

  Metric m = metric_tensor(jet3(L, pt(3, 0, 1, 1)));
  CHECK(m.g(0, 0) == doctest::Approx(1.0));
  CHECK(m.g(1, 1) == doctest::Approx(9.0));

  SplitMix64 rng(7);
  auto points = sample_points(rng, polar.box, 20);
  for (const auto& u : points) {
    Metric at = metric_tensor(jet3(L, u));
    Eigen::MatrixXd a = evaluate_metric(polar, u.x);
    CHECK((at.g - a).cwiseAbs().maxCoeff() <= 1e-12);
  }
  HomogeneityResult h = homogeneity_degree(L, points);
  REQUIRE(h.degree.has_value());
  CHECK(*h.degree == doctest::Approx(2.0).epsilon(1e-10));

  const auto& flat = family("flat-quadratic-phi").metric;
  LagrangianField Lf = build_riemannian_quadratic(flat);
  CHECK(Lf(pt(0, 0, 3, 4)) == doctest::Approx(25.0));
}

TEST_CASE("perturbing with a gradient keeps the metric") {
  const auto& fam = family("flat-quadratic-phi");
  LagrangianField L = perturb_with_gradient(fam.metric, fam.potential);
  // phi = x1^2 gives the perturbation 2 x1 y1
  CHECK(L(pt(1, 2, 3, 4)) == doctest::Approx(31.0));

  const auto& polar = family("polar-linear-phi");
  LagrangianField Lp = perturb_with_gradient(polar.metric, polar.potential);
  CHECK(Lp(pt(1, 0, 1, 1)) == doctest::Approx(1.0 + 1.0 + 1.0));  // y1^2 + x1^2 y2^2 + y2

  SplitMix64 rng(11);
  for (const auto* f : {&family("flat-quadratic-phi"), &polar}) {
    LagrangianField quad = build_riemannian_quadratic(f->metric);
    LagrangianField pert = perturb_with_gradient(f->metric, f->potential);
    auto points = sample_points(rng, f->metric.box, 20);
    for (const auto& u : points) {
      Metric a = metric_tensor(jet3(quad, u));
      Metric b = metric_tensor(jet3(pert, u));
      CHECK((a.g - b.g).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("perturbed pairs share omega, G and N") {
  SplitMix64 rng(13);
  for (const auto& fam : builtin_families()) {
    LagrangianField quad = build_riemannian_quadratic(fam.metric);
    LagrangianField pert = perturb_with_gradient(fam.metric, fam.potential);
    auto points = sample_points(rng, fam.metric.box, 20);
    auto checks = compare_structures(quad, pert, points, 1e-9);
    for (const auto& check : checks) {
      INFO(fam.name, " ", check.name, " residual ", check.max_residual);
      CHECK(check.passed);
    }
  }
}

TEST_CASE("structure comparison rejects genuinely different Lagrangians") {
  // negative control: flat vs polar quadratic must NOT share structures
  LagrangianField flat = build_riemannian_quadratic(family("flat-quadratic-phi").metric);
  LagrangianField polar = build_riemannian_quadratic(family("polar-linear-phi").metric);
  SplitMix64 rng(17);
  auto points = sample_points(rng, testing::polar_box(), 20);
  auto checks = compare_structures(flat, polar, points, 1e-9);
  bool any_failed = false;
  for (const auto& check : checks) any_failed = any_failed || !check.passed;
  CHECK(any_failed);
}

TEST_CASE("obstruction tensor of the paper families and controls") {
  const auto& flat_quad = family("flat-quadratic-phi");
  Eigen::MatrixXd t1 = obstruction_tensor(flat_quad.metric, flat_quad.potential, base(0.4, 1.7));
  CHECK(t1(0, 0) == doctest::Approx(2.0));  // Hessian of x1^2
  CHECK(t1.cwiseAbs().maxCoeff() == doctest::Approx(2.0));

  const auto& polar_lin = family("polar-linear-phi");
  Eigen::MatrixXd t2 = obstruction_tensor(polar_lin.metric, polar_lin.potential, base(2, 0));
  CHECK(t2(0, 1) == doctest::Approx(-0.5));  // -gamma^2_12 dphi/dx2 = -1/x1
  CHECK(t2(1, 0) == doctest::Approx(-0.5));
  CHECK(t2.cwiseAbs().maxCoeff() == doctest::Approx(0.5));

  const auto& null = family("null-control");
  Eigen::MatrixXd t3 = obstruction_tensor(null.metric, null.potential, base(-0.3, 0.9));
  CHECK(t3.cwiseAbs().maxCoeff() == 0.0);

  const auto& hom = family("homogeneous-control");
  Eigen::MatrixXd t4 = obstruction_tensor(hom.metric, hom.potential, base(1.2, 0.5));
  CHECK(t4.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("closed-form horizontal differential matches hand values") {
  const auto& flat_quad = family("flat-quadratic-phi");
  Eigen::VectorXd d1 = dhl_closed_form(flat_quad.metric, flat_quad.potential, pt(1, 2, 3, 4));
  CHECK(d1(0) == doctest::Approx(6.0));
  CHECK(d1(1) == doctest::Approx(0.0));

  const auto& polar_lin = family("polar-linear-phi");
  Eigen::VectorXd d2 = dhl_closed_form(polar_lin.metric, polar_lin.potential, pt(1, 0, 1, 1));
  CHECK(d2(0) == doctest::Approx(-1.0));
  CHECK(d2(1) == doctest::Approx(-1.0));

  const auto& null = family("null-control");
  Eigen::VectorXd d3 = dhl_closed_form(null.metric, null.potential, pt(0.5, 0.5, 2, -1));
  CHECK(d3.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("closed form agrees with the jet route on every family") {
  SplitMix64 rng(19);
  for (const auto& fam : builtin_families()) {
    LagrangianField L = perturb_with_gradient(fam.metric, fam.potential);
    auto points = sample_points(rng, fam.metric.box, 20);
    for (const auto& u : points) {
      Eigen::VectorXd closed = dhl_closed_form(fam.metric, fam.potential, u);
      Eigen::VectorXd general = horizontal_differential(jet3(L, u));
      INFO(fam.name);
      CHECK((closed - general).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("each paper family produces a real witness") {
  SplitMix64 rng(23);
  for (const auto& fam : builtin_families()) {
    LagrangianField L = perturb_with_gradient(fam.metric, fam.potential);
    auto points = sample_points(rng, fam.metric.box, 20);
    double witness = 0.0;
    for (const auto& u : points) {
      witness = std::max(witness, horizontal_differential(jet3(L, u)).cwiseAbs().maxCoeff());
    }
    INFO(fam.name, " witness ", witness);
    if (fam.expects_witness) {
      CHECK(witness > 0.1);
    } else {
      CHECK(witness <= 1e-10);
    }
  }
}

TEST_CASE("equivalence probe on the perturbed flat family") {
  const auto& fam = family("flat-quadratic-phi");
  LagrangianField L = perturb_with_gradient(fam.metric, fam.potential);

  // y1 != 0: both S(L) = 2 y1^2 and L_{|1} = 2 y1 are nonzero
  std::vector<TangentPoint> generic = {pt(0.5, 0, 1, 1), pt(-1, 2, -0.5, 3), pt(0, 0, 2, -1)};
  EquivalenceProbe p1 = equivalence_probe(L, generic);
  CHECK(p1.both_nonzero == 3);
  CHECK(p1.both_zero == 0);

  // y1 = 0: both vanish
  std::vector<TangentPoint> axis = {pt(0.5, 0, 0, 1), pt(-1, 2, 0, 3)};
  EquivalenceProbe p2 = equivalence_probe(L, axis);
  CHECK(p2.both_zero == 2);
  CHECK(p2.both_nonzero == 0);

  // homogeneous control: both vanish everywhere
  const auto& hom = family("homogeneous-control");
  LagrangianField Lh = perturb_with_gradient(hom.metric, hom.potential);
  SplitMix64 rng(29);
  auto points = sample_points(rng, hom.metric.box, 20);
  EquivalenceProbe p3 = equivalence_probe(Lh, points);
  CHECK(p3.both_zero == 20);
  CHECK(p3.spray_zero_only + p3.dh_zero_only + p3.both_nonzero == 0);
}

TEST_CASE("family registry") {
  CHECK(builtin_families().size() == 4);
  CHECK(find_family("flat-quadratic-phi") != nullptr);
  CHECK(find_family("no-such-family") == nullptr);
}
