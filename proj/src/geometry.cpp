#include "lagspace/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "lagspace/errors.hpp"

namespace lagspace {

Metric metric_tensor(const Jet3& jet) {
  const int n = jet.dim;
  Metric m;
  m.g = 0.5 * jet.d2.block(n, n, n, n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m.g);
  m.det = lu.determinant();
  const double scale = m.g.cwiseAbs().maxCoeff();
  const double threshold = 1e-10 * std::pow(scale, n);
  if (!(std::abs(m.det) > threshold)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "fiber Hessian is singular: |det g| = %.3g, threshold %.3g",
                  std::abs(m.det), threshold);
    throw DegenerateLagrangian(buf);
  }
  m.g_inv = lu.inverse();
  return m;
}

Eigen::VectorXd cartan_one_form(const Jet3& jet) { return jet.d1.segment(jet.dim, jet.dim); }

double one_form_pairing(const Eigen::VectorXd& theta, const Eigen::VectorXd& vec2n) {
  return theta.dot(vec2n.head(theta.size()));
}

Eigen::MatrixXd cartan_two_form_natural(const Jet3& jet) {
  const int n = jet.dim;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const Eigen::MatrixXd g = 0.5 * jet.d2.block(n, n, n, n);

  // Base-base block from the antisymmetrized mixed partials; with exact
  // jets this is L_{y^l x^k} - L_{y^k x^l}.
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const double c_lk = jet.d2(n + l, k) - jet.d2(l, n + k);
      const double c_kl = jet.d2(n + k, l) - jet.d2(k, n + l);
      omega(k, l) = 0.5 * (c_lk - c_kl);
    }
  }
  // dy^j ^ dx^i pairs base against fiber with a minus sign:
  // omega(x_k, y_l) = -2 g_kl.
  omega.block(0, n, n, n) = -2.0 * g;
  omega.block(n, 0, n, n) = 2.0 * g;
  return omega;
}

namespace {

// P_k = L_{y^k x^h} y^h - L_{x^k}, the bracketed factor of the spray formula.
Eigen::VectorXd spray_rhs(const Jet3& jet) {
  const int n = jet.dim;
  const Eigen::VectorXd& y = jet.point.y;
  Eigen::VectorXd P(n);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int h = 0; h < n; ++h) acc += jet.d2(n + k, h) * y(h);
    P(k) = acc - jet.d1(k);
  }
  return P;
}

}  // namespace

Eigen::VectorXd semispray_coeffs(const Jet3& jet, const Metric& metric) {
  return 0.25 * metric.g_inv * spray_rhs(jet);
}

Eigen::VectorXd semispray_coeffs(const Jet3& jet) {
  return semispray_coeffs(jet, metric_tensor(jet));
}

Eigen::MatrixXd connection_coeffs(const Jet3& jet, const Metric& metric) {
  const int n = jet.dim;
  const Eigen::VectorXd& y = jet.point.y;
  const Eigen::VectorXd P = spray_rhs(jet);

  Eigen::MatrixXd N(n, n);
  for (int j = 0; j < n; ++j) {
    // d g_ab / dy^j and the induced derivative of the inverse.
    Eigen::MatrixXd dg(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dg(a, b) = 0.5 * jet.d3_at(n + j, n + a, n + b);
    const Eigen::MatrixXd dginv = -metric.g_inv * dg * metric.g_inv;

    // d P_k / dy^j; the last two terms cancel for symmetric jets but are
    // kept so the expression mirrors the derivative exactly.
    Eigen::VectorXd dP(n);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int h = 0; h < n; ++h) acc += jet.d3_at(n + k, h, n + j) * y(h);
      dP(k) = acc + jet.d2(n + k, j) - jet.d2(k, n + j);
    }
    N.col(j) = 0.25 * (dginv * P + metric.g_inv * dP);
  }
  return N;
}

Eigen::MatrixXd connection_coeffs(const Jet3& jet) {
  return connection_coeffs(jet, metric_tensor(jet));
}

Eigen::MatrixXd semispray_coeffs_base_gradient(const Jet3& jet, const Metric& metric) {
  const int n = jet.dim;
  const Eigen::VectorXd& y = jet.point.y;
  const Eigen::VectorXd P = spray_rhs(jet);

  Eigen::MatrixXd dG(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd dg(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dg(a, b) = 0.5 * jet.d3_at(j, n + a, n + b);
    const Eigen::MatrixXd dginv = -metric.g_inv * dg * metric.g_inv;

    Eigen::VectorXd dP(n);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int h = 0; h < n; ++h) acc += jet.d3_at(n + k, h, j) * y(h);
      dP(k) = acc - jet.d2(k, j);
    }
    dG.col(j) = 0.25 * (dginv * P + metric.g_inv * dP);
  }
  return dG;
}

Eigen::MatrixXd horizontal_projector_matrix(const Eigen::MatrixXd& connection) {
  const int n = static_cast<int>(connection.rows());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  h.block(0, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
  h.block(n, 0, n, n) = -connection;
  return h;
}

double energy(const Jet3& jet) {
  const int n = jet.dim;
  return jet.point.y.dot(jet.d1.segment(n, n)) - jet.value;
}

double semispray_derivative(const Jet3& jet, const Eigen::VectorXd& spray) {
  const int n = jet.dim;
  return jet.point.y.dot(jet.d1.head(n)) - 2.0 * spray.dot(jet.d1.segment(n, n));
}

double semispray_derivative(const Jet3& jet) {
  return semispray_derivative(jet, semispray_coeffs(jet));
}

Eigen::VectorXd horizontal_differential(const Jet3& jet, const Eigen::MatrixXd& connection) {
  const int n = jet.dim;
  const Eigen::VectorXd theta = jet.d1.segment(n, n);
  Eigen::VectorXd dh(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += connection(j, i) * theta(j);
    dh(i) = jet.d1(i) - acc;
  }
  return dh;
}

Eigen::VectorXd horizontal_differential(const Jet3& jet) {
  return horizontal_differential(jet, connection_coeffs(jet));
}

Eigen::VectorXd spray_derivative_fiber_gradient(const Jet3& jet) {
  const int n = jet.dim;
  const Eigen::VectorXd& y = jet.point.y;
  const Metric metric = metric_tensor(jet);
  const Eigen::VectorXd spray = semispray_coeffs(jet, metric);
  const Eigen::MatrixXd connection = connection_coeffs(jet, metric);

  Eigen::VectorXd grad(n);
  for (int i = 0; i < n; ++i) {
    double acc = jet.d1(i);
    for (int j = 0; j < n; ++j) acc += y(j) * jet.d2(j, n + i);
    for (int j = 0; j < n; ++j) acc -= 4.0 * metric.g(i, j) * spray(j);
    for (int j = 0; j < n; ++j) acc -= 2.0 * connection(j, i) * jet.d1(n + j);
    grad(i) = acc;
  }
  return grad;
}

Eigen::VectorXd semispray_contraction(const Eigen::MatrixXd& omega, const Eigen::VectorXd& spray,
                                      const Eigen::VectorXd& fiber) {
  const int n = static_cast<int>(spray.size());
  Eigen::VectorXd s(2 * n);
  s.head(n) = fiber;
  s.tail(n) = -2.0 * spray;
  return omega.transpose() * s;
}

Eigen::VectorXd energy_codifferential(const Jet3& jet) {
  const int n = jet.dim;
  const Eigen::VectorXd& y = jet.point.y;
  Eigen::VectorXd d(2 * n);
  for (int k = 0; k < n; ++k) {
    double acc = jet.d1(k);
    for (int h = 0; h < n; ++h) acc -= y(h) * jet.d2(n + h, k);
    d(k) = acc;
  }
  for (int l = 0; l < n; ++l) {
    double acc = 0.0;
    for (int h = 0; h < n; ++h) acc -= y(h) * jet.d2(n + h, n + l);
    d(n + l) = acc;
  }
  return d;
}

GeometryBundle geometry_at(const LagrangianField& L, const TangentPoint& u) {
  GeometryBundle b;
  b.point = u;
  b.jet = jet3(L, u);
  b.metric = metric_tensor(b.jet);
  b.spray = semispray_coeffs(b.jet, b.metric);
  b.connection = connection_coeffs(b.jet, b.metric);
  b.theta = cartan_one_form(b.jet);
  b.omega = cartan_two_form_natural(b.jet);
  b.projector = horizontal_projector_matrix(b.connection);
  b.energy = energy(b.jet);
  b.spray_derivative = semispray_derivative(b.jet, b.spray);
  b.dh = horizontal_differential(b.jet, b.connection);
  return b;
}

HomogeneityResult homogeneity_degree(const LagrangianField& L, std::span<const TangentPoint> points,
                                     double tol) {
  HomogeneityResult result;
  std::vector<double> ratios;
  for (const TangentPoint& u : points) {
    try {
      const Jet3 jet = jet3(L, u, 1);
      const double liouville = u.y.dot(jet.d1.segment(jet.dim, jet.dim));
      if (std::abs(jet.value) <= 1e-12 * (1.0 + std::abs(liouville))) {
        ++result.points_skipped;  // L(u) = 0: ratio undefined here
        continue;
      }
      ratios.push_back(liouville / jet.value);
    } catch (const EvalDomainError&) {
      ++result.points_skipped;
    }
  }
  result.points_used = static_cast<int>(ratios.size());
  if (ratios.empty()) return result;

  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const double k = sorted[sorted.size() / 2];
  double dev = 0.0;
  for (double r : ratios) dev = std::max(dev, std::abs(r - k));
  result.max_deviation = dev;
  if (dev <= tol * (1.0 + std::abs(k))) result.degree = k;
  return result;
}

// ---------------------------------------------------------------------------

namespace {

// Runs body per point, converting domain/regularity failures into recorded
// skips instead of aborting the sweep.
template <typename Body>
void sweep(CheckResult& check, std::span<const TangentPoint> points, Body&& body) {
  for (const TangentPoint& u : points) {
    try {
      check.record(body(u));
    } catch (const EvalDomainError& e) {
      check.skip_point(std::string("domain failure: ") + e.what());
    } catch (const DegenerateLagrangian& e) {
      check.skip_point(std::string("degenerate: ") + e.what());
    }
  }
}

Eigen::VectorXd apply_tangent_structure(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size()) / 2;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * n);
  out.tail(n) = v.head(n);  // J: (X, Y) -> (0, X)
  return out;
}

}  // namespace

CheckResult grifone_projector_check(const LagrangianField& L, std::span<const TangentPoint> points,
                                    double tol) {
  CheckResult check;
  check.name = "grifone-projector";
  check.tolerance = tol;
  const int n = L.dimension();

  sweep(check, points, [&](const TangentPoint& u) {
    const Jet3 jet = jet3(L, u);
    const Metric metric = metric_tensor(jet);
    const Eigen::MatrixXd N = connection_coeffs(jet, metric);
    const Eigen::MatrixXd dGdx = semispray_coeffs_base_gradient(jet, metric);
    const Eigen::MatrixXd h = horizontal_projector_matrix(N);

    // Bracket fields along the natural frame:
    //   [S, d/dx^j] = 2 (dG^i/dx^j) d/dy^i
    //   [S, d/dy^j] = -d/dx^j + 2 N^i_j d/dy^i
    Eigen::MatrixXd h_grifone(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd bracket_sx = Eigen::VectorXd::Zero(2 * n);
      bracket_sx.tail(n) = 2.0 * dGdx.col(j);
      Eigen::VectorXd bracket_sy = Eigen::VectorXd::Zero(2 * n);
      bracket_sy(j) = -1.0;
      bracket_sy.tail(n) = 2.0 * N.col(j);

      Eigen::VectorXd e_base = Eigen::VectorXd::Zero(2 * n);
      e_base(j) = 1.0;
      h_grifone.col(j) = 0.5 * (e_base - bracket_sy + apply_tangent_structure(bracket_sx));

      Eigen::VectorXd e_fiber = Eigen::VectorXd::Zero(2 * n);
      e_fiber(n + j) = 1.0;
      // J e_fiber = 0, so the middle bracket drops out for fiber fields.
      h_grifone.col(n + j) = 0.5 * (e_fiber + apply_tangent_structure(bracket_sy));
    }
    const double scale = 1.0 + N.cwiseAbs().maxCoeff() + dGdx.cwiseAbs().maxCoeff();
    return (h_grifone - h).cwiseAbs().maxCoeff() / scale;
  });
  return check.finish();
}

CheckResult check_cartan_form_identities(const LagrangianField& L,
                                         std::span<const TangentPoint> points,
                                         int vectors_per_point, SplitMix64& rng, double tol) {
  CheckResult check;
  check.name = "cartan-one-form-identities";
  check.tolerance = tol;
  const int n = L.dimension();

  sweep(check, points, [&](const TangentPoint& u) {
    const Jet3 jet = jet3(L, u);
    const Metric metric = metric_tensor(jet);
    const Eigen::VectorXd spray = semispray_coeffs(jet, metric);
    const Eigen::VectorXd theta = cartan_one_form(jet);

    // iota_S theta_L = C(L): pair theta with the 2n components of S.
    Eigen::VectorXd s(2 * n);
    s.head(n) = u.y;
    s.tail(n) = -2.0 * spray;
    const double liouville = u.y.dot(theta);
    double worst = scaled_residual(one_form_pairing(theta, s), liouville);

    // (Lie_S theta_L)(X) = dL(X) on constant-coefficient extensions:
    //   S(theta(X)) - theta([S, X]) with [S, X] evaluated from the jet.
    for (int v = 0; v < vectors_per_point; ++v) {
      const Eigen::VectorXd vec = sample_unit_vector(rng, 2 * n);
      const Eigen::VectorXd a = vec.head(n);
      const Eigen::VectorXd b = vec.tail(n);
      double s_theta_x = 0.0;
      for (int i = 0; i < n; ++i) {
        double term = 0.0;
        for (int h = 0; h < n; ++h) term += u.y(h) * jet.d2(n + i, h);
        for (int h = 0; h < n; ++h) term -= 2.0 * spray(h) * jet.d2(n + i, n + h);
        s_theta_x += a(i) * term;
      }
      const double lie = s_theta_x + theta.dot(b);  // -theta([S,X]) = +theta.b
      const double dl = jet.d1.head(n).dot(a) + jet.d1.tail(n).dot(b);
      worst = std::max(worst, scaled_residual(lie, dl));
    }
    return worst;
  });
  return check.finish();
}

CheckResult check_isomega(const LagrangianField& L, std::span<const TangentPoint> points,
                          int vectors_per_point, SplitMix64& rng, double tol) {
  CheckResult check;
  check.name = "semispray-defining-equation";
  check.tolerance = tol;
  const int n = L.dimension();

  sweep(check, points, [&](const TangentPoint& u) {
    const Jet3 jet = jet3(L, u);
    const Metric metric = metric_tensor(jet);
    const Eigen::VectorXd spray = semispray_coeffs(jet, metric);
    const Eigen::MatrixXd omega = cartan_two_form_natural(jet);
    const Eigen::VectorXd lhs = semispray_contraction(omega, spray, u.y);
    const Eigen::VectorXd rhs = energy_codifferential(jet);

    double worst = 0.0;
    for (int b = 0; b < 2 * n; ++b) worst = std::max(worst, scaled_residual(lhs(b), rhs(b)));
    for (int v = 0; v < vectors_per_point; ++v) {
      const Eigen::VectorXd vec = sample_unit_vector(rng, 2 * n);
      worst = std::max(worst, scaled_residual(lhs.dot(vec), rhs.dot(vec)));
    }
    return worst;
  });
  return check.finish();
}

CheckResult check_horizontal_differential_identity(const LagrangianField& L,
                                                   std::span<const TangentPoint> points,
                                                   double tol) {
  CheckResult check;
  check.name = "horizontal-differential-identity";
  check.tolerance = tol;

  sweep(check, points, [&](const TangentPoint& u) {
    const Jet3 jet = jet3(L, u);
    const Metric metric = metric_tensor(jet);
    const Eigen::MatrixXd N = connection_coeffs(jet, metric);
    const Eigen::VectorXd lhs = horizontal_differential(jet, N);
    const Eigen::VectorXd rhs = 0.5 * spray_derivative_fiber_gradient(jet);
    double worst = 0.0;
    for (int i = 0; i < jet.dim; ++i) worst = std::max(worst, scaled_residual(lhs(i), rhs(i)));
    return worst;
  });
  return check.finish();
}

CheckResult check_lagrangian_subbundle(const LagrangianField& L,
                                       std::span<const TangentPoint> points, int pairs_per_point,
                                       SplitMix64& rng, double tol) {
  CheckResult check;
  check.name = "lagrangian-subbundle";
  check.tolerance = tol;
  const int n = L.dimension();

  sweep(check, points, [&](const TangentPoint& u) {
    const Jet3 jet = jet3(L, u);
    const Metric metric = metric_tensor(jet);
    const Eigen::MatrixXd N = connection_coeffs(jet, metric);
    const Eigen::MatrixXd omega = cartan_two_form_natural(jet);
    const Eigen::MatrixXd h = horizontal_projector_matrix(N);
    const double scale = 1.0 + omega.cwiseAbs().maxCoeff();

    double worst = 0.0;
    for (int p = 0; p < pairs_per_point; ++p) {
      const Eigen::VectorXd x = h * sample_unit_vector(rng, 2 * n);
      const Eigen::VectorXd y = h * sample_unit_vector(rng, 2 * n);
      worst = std::max(worst, std::abs(x.dot(omega * y)) / scale);
    }

    // Reconstruction from the adapted coframe: omega = 2 g_ij dy^j ^ dx^i
    // with dy^j read through delta-y^j = dy^j + N^j_k dx^k.
    const Eigen::MatrixXd gn = metric.g * N;
    Eigen::MatrixXd adapted = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    adapted.block(0, 0, n, n) = 2.0 * (gn.transpose() - gn);
    adapted.block(0, n, n, n) = -2.0 * metric.g;
    adapted.block(n, 0, n, n) = 2.0 * metric.g;
    worst = std::max(worst, (adapted - omega).cwiseAbs().maxCoeff() / scale);
    return worst;
  });
  return check.finish();
}

CheckResult check_homogeneous_laws(const LagrangianField& L, std::span<const TangentPoint> points,
                                   double tol, double homogeneity_tol) {
  CheckResult check;
  check.name = "homogeneous-laws";
  check.tolerance = tol;

  const HomogeneityResult hr = homogeneity_degree(L, points, homogeneity_tol);
  if (!hr.degree.has_value()) {
    check.skipped = true;
    check.note = "not homogeneous: no constant Liouville ratio over the sample set";
    return check.finish();
  }
  const double k = *hr.degree;
  if (std::abs(k - 1.0) <= 1e-6) {
    check.skipped = true;
    check.note = "homogeneous of order 1: the statement does not apply";
    return check.finish();
  }
  {
    char buf[64];
    std::snprintf(buf, sizeof buf, "k = %.12g", k);
    check.note = buf;
  }

  const int n = L.dimension();
  sweep(check, points, [&](const TangentPoint& u) {
    const Jet3 jet = jet3(L, u);
    const Metric metric = metric_tensor(jet);
    const Eigen::VectorXd spray = semispray_coeffs(jet, metric);
    const Eigen::MatrixXd N = connection_coeffs(jet, metric);

    // S(L) = 0, term against term.
    const double t1 = u.y.dot(jet.d1.head(n));
    const double t2 = 2.0 * spray.dot(jet.d1.segment(n, n));
    double worst = scaled_residual(t1, t2);

    // d_hL = 0 componentwise.
    for (int i = 0; i < n; ++i) {
      double carried = 0.0;
      for (int j = 0; j < n; ++j) carried += N(j, i) * jet.d1(n + j);
      worst = std::max(worst, scaled_residual(jet.d1(i), carried));
    }

    // i_S omega_L = (1 - k) dL.
    const Eigen::MatrixXd omega = cartan_two_form_natural(jet);
    const Eigen::VectorXd lhs = semispray_contraction(omega, spray, u.y);
    for (int b = 0; b < 2 * n; ++b) {
      worst = std::max(worst, scaled_residual(lhs(b), (1.0 - k) * jet.d1(b)));
    }
    return worst;
  });
  return check.finish();
}

IdentityReport run_identity_suite(const LagrangianField& L, const SampleBox& box,
                                  const SuiteConfig& cfg) {
  SplitMix64 point_rng(cfg.seed);
  const std::vector<TangentPoint> points = sample_points(point_rng, box, cfg.sample_count);

  IdentityReport report;
  report.checks.push_back(validate_jets(L, points, cfg.fd));
  report.checks.push_back(grifone_projector_check(L, points, cfg.tolerance));
  {
    SplitMix64 rng(cfg.seed + 101);
    report.checks.push_back(
        check_cartan_form_identities(L, points, cfg.vectors_per_point, rng, cfg.tolerance));
  }
  {
    SplitMix64 rng(cfg.seed + 202);
    report.checks.push_back(check_isomega(L, points, cfg.vectors_per_point, rng, cfg.tolerance));
  }
  report.checks.push_back(check_horizontal_differential_identity(L, points, cfg.tolerance));
  {
    SplitMix64 rng(cfg.seed + 303);
    report.checks.push_back(
        check_lagrangian_subbundle(L, points, cfg.vectors_per_point, rng, cfg.tolerance));
  }
  report.checks.push_back(check_homogeneous_laws(L, points, cfg.tolerance));
  return report;
}

}  // namespace lagspace
