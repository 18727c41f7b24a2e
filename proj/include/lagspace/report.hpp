#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

namespace lagspace {

// One residual check over a sample sweep. Residuals are scaled (see
// scaled_residual in geometry.hpp), the check passes when the max over all
// evaluated points is within tolerance. Checks whose precondition failed
// (e.g. no homogeneity degree detected) are marked skipped; skipped checks
// never fail a report.
struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  double max_residual = 0.0;
  bool passed = false;
  bool skipped = false;
  std::string note;
  int points_evaluated = 0;
  int points_skipped = 0;
  std::vector<double> residuals;  // one entry per evaluated point

  void record(double residual) {
    residuals.push_back(residual);
    max_residual = std::max(max_residual, residual);
    ++points_evaluated;
  }

  void skip_point(std::string_view reason) {
    ++points_skipped;
    if (note.empty()) note = reason;
  }

  // Call once after the sweep.
  CheckResult& finish() {
    passed = !skipped && max_residual <= tolerance;
    return *this;
  }
};

struct IdentityReport {
  std::vector<CheckResult> checks;

  bool overall_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.skipped || c.passed; });
  }

  const CheckResult* find(std::string_view name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

}  // namespace lagspace
