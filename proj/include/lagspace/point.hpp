#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace lagspace {

// Point of the tangent bundle in an induced chart: base coordinates x^i,
// fiber coordinates y^i. The zero section y = 0 is excluded from every
// evaluation, so construction rejects it outright.
struct TangentPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  TangentPoint() = default;

  TangentPoint(Eigen::VectorXd x_coords, Eigen::VectorXd y_coords)
      : x(std::move(x_coords)), y(std::move(y_coords)) {
    if (x.size() != y.size() || x.size() == 0) {
      throw std::invalid_argument("tangent point needs matching nonempty x and y");
    }
    if (!x.allFinite() || !y.allFinite()) {
      throw std::invalid_argument("tangent point coordinates must be finite");
    }
    if (y.isZero(0.0)) {
      throw std::invalid_argument("tangent point lies on the zero section (y = 0)");
    }
  }

  int dim() const { return static_cast<int>(x.size()); }
};

}  // namespace lagspace
