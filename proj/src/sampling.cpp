#include "lagspace/sampling.hpp"

#include <stdexcept>

namespace lagspace {

SampleBox SampleBox::cube(int dim, double lo, double hi) {
  SampleBox box;
  box.x_lo = Eigen::VectorXd::Constant(dim, lo);
  box.x_hi = Eigen::VectorXd::Constant(dim, hi);
  box.y_lo = Eigen::VectorXd::Constant(dim, lo);
  box.y_hi = Eigen::VectorXd::Constant(dim, hi);
  return box;
}

TangentPoint sample_point(SplitMix64& rng, const SampleBox& box) {
  const int n = box.dim();
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) x(i) = rng.uniform(box.x_lo(i), box.x_hi(i));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (int i = 0; i < n; ++i) y(i) = rng.uniform(box.y_lo(i), box.y_hi(i));
    if (y.norm() >= box.min_fiber_norm) return TangentPoint(x, y);
  }
  throw std::runtime_error("fiber sampling kept landing inside the rejected ball");
}

std::vector<TangentPoint> sample_points(SplitMix64& rng, const SampleBox& box, int count) {
  std::vector<TangentPoint> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) points.push_back(sample_point(rng, box));
  return points;
}

Eigen::VectorXd sample_unit_vector(SplitMix64& rng, int size) {
  for (;;) {
    Eigen::VectorXd v(size);
    for (int i = 0; i < size; ++i) v(i) = rng.uniform(-1.0, 1.0);
    double norm = v.norm();
    if (norm > 0.1) return v / norm;
  }
}

}  // namespace lagspace
