#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "sdde/errors.hpp"

namespace sdde {

/// Uniform time grid. Node times are always computed as t0 + k*dt by index
/// arithmetic, never by accumulating sums, so two grids sharing t0 and dt
/// agree bitwise on shared nodes.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::int64_t n_steps = 0;

  TimeGrid() = default;
  TimeGrid(double t0_, double dt_, std::int64_t n_steps_) : t0(t0_), dt(dt_), n_steps(n_steps_) {
    if (!(dt > 0.0)) throw ShapeError("TimeGrid: dt must be > 0");
    if (n_steps < 0) throw ShapeError("TimeGrid: n_steps must be >= 0");
  }

  double time(std::int64_t k) const { return t0 + static_cast<double>(k) * dt; }
  double t_end() const { return time(n_steps); }
  std::int64_t node_count() const { return n_steps + 1; }

  /// Index of the node at time t; throws RangeError if t is not a grid node
  /// (within a relative tolerance) or lies outside the grid.
  std::int64_t index_of(double t) const {
    const auto k = static_cast<std::int64_t>(std::llround((t - t0) / dt));
    const double err = std::fabs(time(k) - t);
    if (err > 1e-9 * std::max(1.0, std::fabs(t)))
      throw RangeError("TimeGrid: time " + std::to_string(t) + " is not a grid node");
    if (k < 0 || k > n_steps)
      throw RangeError("TimeGrid: time " + std::to_string(t) + " outside grid window");
    return k;
  }

  bool contains(double t) const { return t >= t0 - 1e-12 && t <= t_end() + 1e-12; }
};

/// Ratio n = a/b where the ratio must be a (positive) whole number, e.g. a
/// solver step over a path step. Throws if the ratio is not integral.
inline std::int64_t exact_ratio(double a, double b, const char* what) {
  const auto n = static_cast<std::int64_t>(std::llround(a / b));
  if (n <= 0 || std::fabs(static_cast<double>(n) * b - a) > 1e-9 * std::max(1.0, std::fabs(a)))
    throw ShapeError(std::string(what) + ": " + std::to_string(a) + " is not an integer multiple of " +
                     std::to_string(b));
  return n;
}

}  // namespace sdde
