#pragma once

#include <cstdint>
#include <vector>

#include "sdde/detail/interp.hpp"
#include "sdde/errors.hpp"
#include "sdde/linalg.hpp"
#include "sdde/time_grid.hpp"

namespace sdde {

/// A sampled solution path: one R^d value per grid node, linear in between.
class Trajectory {
public:
  Trajectory() = default;
  Trajectory(TimeGrid grid, int dim)
      : grid_(grid), dim_(dim), values_(static_cast<std::size_t>(grid.node_count()) * dim, 0.0) {}

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }

  double value(std::int64_t node, int i) const {
    return values_[static_cast<std::size_t>(node) * dim_ + i];
  }
  void set_value(std::int64_t node, int i, double v) {
    values_[static_cast<std::size_t>(node) * dim_ + i] = v;
  }
  const double* node_ptr(std::int64_t node) const {
    return values_.data() + static_cast<std::size_t>(node) * dim_;
  }
  double* node_ptr(std::int64_t node) {
    return values_.data() + static_cast<std::size_t>(node) * dim_;
  }
  Vec node_value(std::int64_t node) const {
    return Vec(node_ptr(node), node_ptr(node) + dim_);
  }

  /// Linear interpolation at time t. Positions within ~1e-9 of a node snap to
  /// it, so queries at (floating-point representations of) node times return
  /// stored values exactly.
  void eval(double t, Vec& out) const {
    if (t < grid_.t0 - 1e-9 * std::max(1.0, std::fabs(grid_.t0)) ||
        t > grid_.t_end() + 1e-9 * std::max(1.0, std::fabs(grid_.t_end())))
      throw RangeError("Trajectory::eval: time outside grid");
    out.resize(static_cast<std::size_t>(dim_));
    const double pos = (t - grid_.t0) / grid_.dt;
    detail::eval_at_position(values_.data(), grid_.node_count(), dim_, pos, out.data());
  }
  Vec eval(double t) const {
    Vec out(static_cast<std::size_t>(dim_));
    eval(t, out);
    return out;
  }

  /// Drop all nodes after `last_node` (used when a run blows up).
  void truncate(std::int64_t last_node) {
    grid_.n_steps = last_node;
    values_.resize(static_cast<std::size_t>(grid_.node_count()) * dim_);
  }

private:
  TimeGrid grid_;
  int dim_ = 0;
  std::vector<double> values_;
};

}  // namespace sdde
