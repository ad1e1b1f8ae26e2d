#pragma once

#include <cstdint>
#include <vector>

#include "sdde/linalg.hpp"
#include "sdde/trajectory.hpp"

namespace sdde {

/// Outcome of comparing two segments a, b in the pointwise partial order.
/// LEQ: a <= b at every sample; STRICT: LEQ and a != b; STRONG: a < b at
/// every sample and coordinate; INCOMPARABLE otherwise.
enum class OrderFlag { LEQ, STRICT, STRONG, INCOMPARABLE };

const char* to_string(OrderFlag f);

/// A continuous R^d-valued history on [-r, 0]: uniform samples, linear
/// interpolation in between. This is the state of the delay system.
class Segment {
public:
  Segment() = default;

  /// samples_flat holds sample_count x dim values, sample k at offset k*dim;
  /// sample 0 sits at u = -delay, the last sample at u = 0.
  Segment(double delay, int dim, std::vector<double> samples_flat);

  static Segment constant(double delay, const Vec& value, int n_samples = 2);

  double delay() const { return delay_; }
  int dim() const { return dim_; }
  int sample_count() const { return count_; }
  double sample_spacing() const { return delay_ / static_cast<double>(count_ - 1); }

  double sample(int k, int i) const { return samples_[static_cast<std::size_t>(k) * dim_ + i]; }
  Vec sample(int k) const {
    const double* p = samples_.data() + static_cast<std::size_t>(k) * dim_;
    return Vec(p, p + dim_);
  }
  const double* data() const { return samples_.data(); }

  /// Value at u = 0 (the current state), exact sample access.
  double endpoint(int i) const { return sample(count_ - 1, i); }
  Vec endpoint() const { return sample(count_ - 1); }

  /// Overwrite the sample storage in place (same shape). Solver hot path;
  /// the segment must not be shared while being rewritten.
  void overwrite_samples(const double* src);

  /// Value at u in [-delay, 0]; near-node positions snap to the sample.
  void eval(double u, Vec& out) const;
  Vec eval(double u) const {
    Vec out(static_cast<std::size_t>(dim_));
    eval(u, out);
    return out;
  }
  double eval1(double u, int coord) const;

  double sup_norm() const;

private:
  double delay_ = 1.0;
  int dim_ = 0;
  int count_ = 0;
  std::vector<double> samples_;
};

/// History segment of a trajectory at time t: u -> x(t+u), u in [-r, 0].
/// When r is an integer multiple of the grid step and t is a grid node the
/// samples are exact node copies (one sample per grid step), otherwise the
/// trajectory is interpolated at ceil(r/dt)+1 uniform points.
Segment segment_at(const Trajectory& traj, double t, double r);

OrderFlag compare_segments(const Segment& a, const Segment& b);

double segment_sup_norm(const Segment& a);

/// Sample count near `target` whose spacing delay/(n-1) is an exact multiple
/// of dt, as the solvers require of initial segments.
int compatible_sample_count(double delay, double dt, int target);

/// Discrete delay measure: nonnegative weights on taps in [-r, 0] summing to
/// one, applied to a segment coordinate by linear interpolation at the taps.
struct DelayMeasure {
  Vec taps;
  Vec weights;

  static DelayMeasure point_mass(double tap) { return DelayMeasure{{tap}, {1.0}}; }

  void validate(double delay) const;
  double apply(const Segment& seg, int coord) const;
};

}  // namespace sdde
