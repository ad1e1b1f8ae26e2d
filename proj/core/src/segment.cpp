#include "sdde/segment.hpp"

#include <algorithm>
#include <cmath>

#include "sdde/detail/interp.hpp"
#include "sdde/errors.hpp"

namespace sdde {

const char* to_string(OrderFlag f) {
  switch (f) {
    case OrderFlag::LEQ: return "LEQ";
    case OrderFlag::STRICT: return "STRICT";
    case OrderFlag::STRONG: return "STRONG";
    case OrderFlag::INCOMPARABLE: return "INCOMPARABLE";
  }
  return "?";
}

Segment::Segment(double delay, int dim, std::vector<double> samples_flat)
    : delay_(delay), dim_(dim), samples_(std::move(samples_flat)) {
  if (!(delay > 0.0)) throw ShapeError("Segment: delay must be > 0");
  if (dim <= 0) throw ShapeError("Segment: dim must be > 0");
  if (samples_.size() % static_cast<std::size_t>(dim) != 0)
    throw ShapeError("Segment: sample data not a multiple of dim");
  count_ = static_cast<int>(samples_.size() / static_cast<std::size_t>(dim));
  if (count_ < 2) throw ShapeError("Segment: needs at least 2 samples");
}

Segment Segment::constant(double delay, const Vec& value, int n_samples) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n_samples) * value.size());
  for (int k = 0; k < n_samples; ++k) flat.insert(flat.end(), value.begin(), value.end());
  return Segment(delay, static_cast<int>(value.size()), std::move(flat));
}

void Segment::overwrite_samples(const double* src) {
  std::copy(src, src + samples_.size(), samples_.data());
}

void Segment::eval(double u, Vec& out) const {
  if (u < -delay_ - 1e-9 * std::max(1.0, delay_) || u > 1e-9 * std::max(1.0, delay_))
    throw RangeError("Segment::eval: u outside [-delay, 0]");
  out.resize(static_cast<std::size_t>(dim_));
  const double pos = (u + delay_) / sample_spacing();
  detail::eval_at_position(samples_.data(), count_, dim_, pos, out.data());
}

double Segment::eval1(double u, int coord) const {
  thread_local Vec tmp;
  eval(u, tmp);
  return tmp[static_cast<std::size_t>(coord)];
}

double Segment::sup_norm() const {
  double s = 0.0;
  for (double v : samples_) s = std::max(s, std::fabs(v));
  return s;
}

Segment segment_at(const Trajectory& traj, double t, double r) {
  const TimeGrid& g = traj.grid();
  if (!(r > 0.0)) throw ShapeError("segment_at: delay must be > 0");
  if (t - r < g.t0 - 1e-9 * std::max(1.0, std::fabs(g.t0)))
    throw RangeError("segment_at: t - r before trajectory start");
  if (t > g.t_end() + 1e-9 * std::max(1.0, std::fabs(g.t_end())))
    throw RangeError("segment_at: t after trajectory end");

  const auto steps = static_cast<std::int64_t>(std::llround(r / g.dt));
  const bool aligned_r = steps >= 1 && std::fabs(static_cast<double>(steps) * g.dt - r) <= 1e-9 * std::max(1.0, r);
  std::int64_t t_node = -1;
  if (aligned_r) {
    const auto k = static_cast<std::int64_t>(std::llround((t - g.t0) / g.dt));
    if (k >= 0 && k <= g.n_steps && std::fabs(g.time(k) - t) <= 1e-9 * std::max(1.0, std::fabs(t)) &&
        k - steps >= 0)
      t_node = k;
  }

  if (t_node >= 0) {
    // exact node copies: sample j = node (t_node - steps + j)
    std::vector<double> flat(static_cast<std::size_t>(steps + 1) * traj.dim());
    std::copy(traj.node_ptr(t_node - steps), traj.node_ptr(t_node) + traj.dim(), flat.data());
    return Segment(r, traj.dim(), std::move(flat));
  }

  const auto n = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(r / g.dt)), 1);
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n + 1) * traj.dim());
  Vec tmp;
  for (std::int64_t j = 0; j <= n; ++j) {
    const double u = (static_cast<double>(j) / static_cast<double>(n) - 1.0) * r;
    traj.eval(t + u, tmp);
    flat.insert(flat.end(), tmp.begin(), tmp.end());
  }
  return Segment(r, traj.dim(), std::move(flat));
}

OrderFlag compare_segments(const Segment& a, const Segment& b) {
  if (a.dim() != b.dim() || a.sample_count() != b.sample_count() ||
      std::fabs(a.delay() - b.delay()) > 1e-12 * std::max(1.0, a.delay()))
    throw ShapeError("compare_segments: shape mismatch");
  bool leq = true, equal = true, strong = true;
  for (int k = 0; k < a.sample_count(); ++k)
    for (int i = 0; i < a.dim(); ++i) {
      const double av = a.sample(k, i), bv = b.sample(k, i);
      if (av > bv) leq = false;
      if (av != bv) equal = false;
      if (!(av < bv)) strong = false;
    }
  if (!leq) return OrderFlag::INCOMPARABLE;
  if (strong) return OrderFlag::STRONG;
  if (!equal) return OrderFlag::STRICT;
  return OrderFlag::LEQ;
}

double segment_sup_norm(const Segment& a) { return a.sup_norm(); }

int compatible_sample_count(double delay, double dt, int target) {
  const std::int64_t steps = exact_ratio(delay, dt, "segment delay/dt");
  for (std::int64_t d = 0; d < steps; ++d)
    for (const std::int64_t cand : {static_cast<std::int64_t>(target) - 1 + d,
                                    static_cast<std::int64_t>(target) - 1 - d})
      if (cand >= 1 && cand <= steps && steps % cand == 0) return static_cast<int>(cand) + 1;
  return static_cast<int>(steps) + 1;
}

void DelayMeasure::validate(double delay) const {
  if (taps.size() != weights.size() || taps.empty())
    throw ShapeError("DelayMeasure: taps/weights mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    if (taps[k] < -delay - 1e-12 || taps[k] > 1e-12)
      throw ShapeError("DelayMeasure: tap outside [-delay, 0]");
    if (weights[k] < 0.0) throw ShapeError("DelayMeasure: negative weight");
    sum += weights[k];
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw ShapeError("DelayMeasure: weights must sum to 1");
}

double DelayMeasure::apply(const Segment& seg, int coord) const {
  double s = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) s += weights[k] * seg.eval1(taps[k], coord);
  return s;
}

}  // namespace sdde
