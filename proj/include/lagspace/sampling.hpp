#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "lagspace/point.hpp"

namespace lagspace {

// SplitMix64 (Steele, Lea & Flood). Used instead of the std:: engines so a
// seeded run draws the same points on every platform and standard library.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
};

// Axis-aligned sampling region on the tangent bundle. Fiber draws with
// ||y|| < min_fiber_norm are rejected to stay off the zero section.
struct SampleBox {
  Eigen::VectorXd x_lo, x_hi;
  Eigen::VectorXd y_lo, y_hi;
  double min_fiber_norm = 0.1;

  static SampleBox cube(int dim, double lo = -2.0, double hi = 2.0);
  int dim() const { return static_cast<int>(x_lo.size()); }
};

TangentPoint sample_point(SplitMix64& rng, const SampleBox& box);
std::vector<TangentPoint> sample_points(SplitMix64& rng, const SampleBox& box, int count);

// Uniform direction on the unit sphere of the given dimension (rejection
// sampled from the cube, then normalized).
Eigen::VectorXd sample_unit_vector(SplitMix64& rng, int size);

}  // namespace lagspace
