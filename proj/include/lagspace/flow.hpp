#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "lagspace/field.hpp"

namespace lagspace {

// Fixed-step classical Runge-Kutta; no step control by design so the
// convergence order is directly testable.
struct IntegratorConfig {
  double step = 1e-3;
  double t_end = 1.0;
};

enum class FlowKind { Semispray, Horizontal };

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double lagrangian = 0.0;
  double energy = 0.0;
  double spray_derivative = 0.0;     // S(L)
  double horizontal_derivative = 0.0;  // (hS)(L) = y^i L_{|i}
  double dh_max = 0.0;               // max_i |L_{|i}|
};

struct Trajectory {
  FlowKind kind = FlowKind::Semispray;
  std::vector<TrajectorySample> samples;
  bool truncated = false;
  std::string truncation_reason;
  bool fiber_collapse = false;  // ||y|| fell below 0.1 ||y(0)||; flagged, not fatal
};

// Integral curves of the semispray: x' = y, y' = -2 G(x, y).
Trajectory integrate_semispray(const LagrangianField& L, const TangentPoint& u0,
                               const IntegratorConfig& cfg);

// Integral curves of hS (horizontal natural lifts): x' = y, y' = -N(x, y) y.
Trajectory integrate_horizontal(const LagrangianField& L, const TangentPoint& u0,
                                const IntegratorConfig& cfg);

struct DriftSummary {
  double l_initial = 0.0, l_final = 0.0;
  double e_initial = 0.0, e_final = 0.0;
  double max_l_drift = 0.0, final_l_drift = 0.0;  // absolute
  double max_e_drift = 0.0, final_e_drift = 0.0;
  double rel_max_l_drift = 0.0, rel_final_l_drift = 0.0;
  double rel_max_e_drift = 0.0, rel_final_e_drift = 0.0;
  // Centred-difference dL/dt against S(L) (semispray) or y^i L_{|i}
  // (horizontal) at interior samples; O(step^2).
  double max_dldt_residual = 0.0;
};

DriftSummary drift_report(const Trajectory& traj);

// CSV columns, stable: t,x1..xn,y1..yn,L,E,SL,dhL_max
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

// Max over shared sample indices of the state-space distance.
double max_pointwise_gap(const Trajectory& a, const Trajectory& b);

}  // namespace lagspace
