#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "sdde/linalg.hpp"
#include "sdde/time_grid.hpp"

namespace sdde {

/// Time shift in whole grid steps.
struct ShiftIndex {
  std::int64_t k = 0;
};

/// Two-sided, grid-sampled m-dimensional Wiener trajectory, reproducible
/// from its seed. Increments are counter-based draws keyed by
/// (seed, absolute step index, driver), so any sub-window of the same seed
/// agrees bitwise with any other on their overlap.
///
/// Shifting relabels which node is time zero; values are anchored by
/// subtracting the stored sample at the current origin, which keeps the
/// shift group law exact and leaves raw increments untouched.
class BrownianPath {
public:
  BrownianPath() = default;

  /// Sample a path on `grid`, which must contain time 0 as a node.
  static BrownianPath sample(std::uint64_t seed, const TimeGrid& grid, int drivers);

  /// Convenience: window [-t_minus, t_plus] at step dt.
  static BrownianPath sample_window(std::uint64_t seed, double t_minus, double t_plus, double dt,
                                    int drivers);

  int drivers() const { return m_; }
  double dt() const { return dt_; }
  std::int64_t n_steps() const { return n_; }
  std::int64_t origin() const { return origin_; }
  std::uint64_t seed() const { return seed_; }

  double time(std::int64_t node) const { return static_cast<double>(node - origin_) * dt_; }
  double t_start() const { return time(0); }
  double t_end() const { return time(n_); }

  /// W_j at a grid node, anchored so that value(origin(), j) == 0 exactly.
  double value(std::int64_t node, int j) const {
    return raw(node, j) - raw(origin_, j);
  }

  /// Raw increment W_j(to) - W_j(from) by node index. Shift-invariant
  /// bitwise: only the stored samples enter the subtraction.
  double increment(std::int64_t from, std::int64_t to, int j) const {
    return raw(to, j) - raw(from, j);
  }

  /// Node index at time t (must be a grid node inside the window).
  std::int64_t node_at(double t) const;

  /// Piecewise-linear evaluation between nodes.
  double eval(double t, int j) const;

  /// The shifted path (theta_s w)(t) = w(t + s) - w(s) with s = k.k * dt.
  BrownianPath shifted(ShiftIndex k) const;

  /// CSV dump: time, W1..Wm at 17 significant digits.
  void dump_csv(std::ostream& os) const;

private:
  double raw(std::int64_t node, int j) const {
    return raw_[static_cast<std::size_t>(node) * m_ + j];
  }

  double dt_ = 1.0;
  std::int64_t n_ = 0;       // steps; nodes are 0..n_
  std::int64_t origin_ = 0;  // node index of time zero
  int m_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> raw_;  // (n_+1) x m_, raw(gen_origin) == 0
};

/// Functional alias of BrownianPath::sample.
BrownianPath sample_path(std::uint64_t seed, const TimeGrid& grid, int drivers);

/// Functional alias of BrownianPath::shifted.
BrownianPath wiener_shift(const BrownianPath& path, ShiftIndex k);

}  // namespace sdde
