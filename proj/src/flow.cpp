#include "lagspace/flow.hpp"

#include <cmath>
#include <ostream>

#include "lagspace/errors.hpp"
#include "lagspace/geometry.hpp"

namespace lagspace {

namespace {

struct State {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

// Fiber velocity of the flow; throws on degenerate metric or domain exit.
Eigen::VectorXd fiber_velocity(const LagrangianField& L, const State& s, FlowKind kind) {
  if (s.y.isZero(0.0)) throw EvalDomainError("flow reached the zero section");
  const TangentPoint u(s.x, s.y);
  if (kind == FlowKind::Semispray) {
    const Jet3 jet = jet3(L, u, 2);
    return -2.0 * semispray_coeffs(jet);
  }
  const Jet3 jet = jet3(L, u, 3);
  return -(connection_coeffs(jet) * s.y);
}

TrajectorySample diagnostics(const LagrangianField& L, double t, const State& s) {
  const TangentPoint u(s.x, s.y);
  const Jet3 jet = jet3(L, u);
  const Metric metric = metric_tensor(jet);
  const Eigen::VectorXd spray = semispray_coeffs(jet, metric);
  const Eigen::VectorXd dh = horizontal_differential(jet, connection_coeffs(jet, metric));

  TrajectorySample sample;
  sample.t = t;
  sample.x = s.x;
  sample.y = s.y;
  sample.lagrangian = jet.value;
  sample.energy = energy(jet);
  sample.spray_derivative = semispray_derivative(jet, spray);
  sample.horizontal_derivative = s.y.dot(dh);
  sample.dh_max = dh.cwiseAbs().maxCoeff();
  return sample;
}

State rk4_step(const LagrangianField& L, const State& s, double h, FlowKind kind) {
  auto deriv = [&](const State& at) -> State {
    return {at.y, fiber_velocity(L, at, kind)};
  };
  auto advance = [](const State& base, const State& k, double factor) -> State {
    return {base.x + factor * k.x, base.y + factor * k.y};
  };
  const State k1 = deriv(s);
  const State k2 = deriv(advance(s, k1, 0.5 * h));
  const State k3 = deriv(advance(s, k2, 0.5 * h));
  const State k4 = deriv(advance(s, k3, h));
  return {s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.y + (h / 6.0) * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
}

Trajectory integrate(const LagrangianField& L, const TangentPoint& u0, const IntegratorConfig& cfg,
                     FlowKind kind) {
  if (cfg.step <= 0.0 || cfg.t_end <= 0.0 || cfg.step > cfg.t_end) {
    throw std::invalid_argument("integrator needs 0 < step <= t_end");
  }

  Trajectory traj;
  traj.kind = kind;
  const double y0_norm = u0.y.norm();
  State s{u0.x, u0.y};
  double t = 0.0;
  traj.samples.push_back(diagnostics(L, t, s));

  const auto steps = static_cast<long>(std::llround(cfg.t_end / cfg.step));
  for (long i = 0; i < steps; ++i) {
    try {
      s = rk4_step(L, s, cfg.step, kind);
      t = cfg.step * static_cast<double>(i + 1);
      if (s.y.isZero(0.0)) throw EvalDomainError("flow reached the zero section");
      traj.samples.push_back(diagnostics(L, t, s));
    } catch (const DegenerateLagrangian& e) {
      traj.truncated = true;
      traj.truncation_reason = e.what();
      break;
    } catch (const EvalDomainError& e) {
      traj.truncated = true;
      traj.truncation_reason = e.what();
      break;
    }
    if (s.y.norm() < 0.1 * y0_norm) traj.fiber_collapse = true;
  }
  return traj;
}

}  // namespace

Trajectory integrate_semispray(const LagrangianField& L, const TangentPoint& u0,
                               const IntegratorConfig& cfg) {
  return integrate(L, u0, cfg, FlowKind::Semispray);
}

Trajectory integrate_horizontal(const LagrangianField& L, const TangentPoint& u0,
                                const IntegratorConfig& cfg) {
  return integrate(L, u0, cfg, FlowKind::Horizontal);
}

DriftSummary drift_report(const Trajectory& traj) {
  if (traj.samples.size() < 2) {
    throw std::invalid_argument("drift report needs at least two samples");
  }
  DriftSummary out;
  const TrajectorySample& first = traj.samples.front();
  const TrajectorySample& last = traj.samples.back();
  out.l_initial = first.lagrangian;
  out.e_initial = first.energy;
  out.l_final = last.lagrangian;
  out.e_final = last.energy;

  for (const TrajectorySample& s : traj.samples) {
    out.max_l_drift = std::max(out.max_l_drift, std::abs(s.lagrangian - first.lagrangian));
    out.max_e_drift = std::max(out.max_e_drift, std::abs(s.energy - first.energy));
  }
  out.final_l_drift = std::abs(last.lagrangian - first.lagrangian);
  out.final_e_drift = std::abs(last.energy - first.energy);

  const double l_scale = std::abs(first.lagrangian) > 0.0 ? std::abs(first.lagrangian) : 1.0;
  const double e_scale = std::abs(first.energy) > 0.0 ? std::abs(first.energy) : 1.0;
  out.rel_max_l_drift = out.max_l_drift / l_scale;
  out.rel_final_l_drift = out.final_l_drift / l_scale;
  out.rel_max_e_drift = out.max_e_drift / e_scale;
  out.rel_final_e_drift = out.final_e_drift / e_scale;

  for (std::size_t i = 1; i + 1 < traj.samples.size(); ++i) {
    const double dt = traj.samples[i + 1].t - traj.samples[i - 1].t;
    const double observed =
        (traj.samples[i + 1].lagrangian - traj.samples[i - 1].lagrangian) / dt;
    const double predicted = traj.kind == FlowKind::Semispray
                                 ? traj.samples[i].spray_derivative
                                 : traj.samples[i].horizontal_derivative;
    out.max_dldt_residual = std::max(out.max_dldt_residual, std::abs(observed - predicted));
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  const int n = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().x.size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ",y" << i;
  os << ",L,E,SL,dhL_max\n";

  const auto old_precision = os.precision(17);
  for (const TrajectorySample& s : traj.samples) {
    os << s.t;
    for (int i = 0; i < n; ++i) os << ',' << s.x(i);
    for (int i = 0; i < n; ++i) os << ',' << s.y(i);
    os << ',' << s.lagrangian << ',' << s.energy << ',' << s.spray_derivative << ',' << s.dh_max
       << '\n';
  }
  os.precision(old_precision);
}

double max_pointwise_gap(const Trajectory& a, const Trajectory& b) {
  const std::size_t count = std::min(a.samples.size(), b.samples.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dx = (a.samples[i].x - b.samples[i].x).norm();
    const double dy = (a.samples[i].y - b.samples[i].y).norm();
    gap = std::max(gap, std::hypot(dx, dy));
  }
  return gap;
}

}  // namespace lagspace
