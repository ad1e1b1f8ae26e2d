#include "sdde/noise.hpp"

#include <cmath>

#include "sdde/errors.hpp"
#include "sdde/io.hpp"
#include "sdde/rng.hpp"

namespace sdde {

BrownianPath BrownianPath::sample(std::uint64_t seed, const TimeGrid& grid, int drivers) {
  if (drivers <= 0) throw ShapeError("BrownianPath: drivers must be > 0");
  const std::int64_t origin = grid.index_of(0.0);

  BrownianPath p;
  p.dt_ = grid.dt;
  p.n_ = grid.n_steps;
  p.origin_ = origin;
  p.m_ = drivers;
  p.seed_ = seed;
  p.raw_.assign(static_cast<std::size_t>(grid.node_count()) * drivers, 0.0);

  // The absolute step index of the step from node i to i+1 is i - origin,
  // i.e. the step covering [k*dt, (k+1)*dt) has index k regardless of the
  // window, which is what makes overlapping windows agree.
  const double sq = std::sqrt(grid.dt);
  for (int j = 0; j < drivers; ++j) {
    double w = 0.0;
    for (std::int64_t i = origin; i < grid.n_steps; ++i) {
      w += sq * counter_gauss(seed, i - origin, static_cast<std::uint64_t>(j));
      p.raw_[static_cast<std::size_t>(i + 1) * drivers + j] = w;
    }
    w = 0.0;
    for (std::int64_t i = origin - 1; i >= 0; --i) {
      w -= sq * counter_gauss(seed, i - origin, static_cast<std::uint64_t>(j));
      p.raw_[static_cast<std::size_t>(i) * drivers + j] = w;
    }
  }
  return p;
}

BrownianPath BrownianPath::sample_window(std::uint64_t seed, double t_minus, double t_plus,
                                         double dt, int drivers) {
  if (t_minus < 0 || t_plus < 0) throw ShapeError("BrownianPath: negative window extent");
  const std::int64_t n_minus = t_minus > 0 ? exact_ratio(t_minus, dt, "path window t_minus") : 0;
  const std::int64_t n_plus = t_plus > 0 ? exact_ratio(t_plus, dt, "path window t_plus") : 0;
  return sample(seed, TimeGrid(-static_cast<double>(n_minus) * dt, dt, n_minus + n_plus), drivers);
}

std::int64_t BrownianPath::node_at(double t) const {
  const auto k = origin_ + static_cast<std::int64_t>(std::llround(t / dt_));
  if (k < 0 || k > n_ || std::fabs(time(k) - t) > 1e-9 * std::max(1.0, std::fabs(t)))
    throw RangeError("BrownianPath: time " + std::to_string(t) + " is not a node in the window");
  return k;
}

double BrownianPath::eval(double t, int j) const {
  const double pos = t / dt_ + static_cast<double>(origin_);
  if (pos < -1e-9 || pos > static_cast<double>(n_) + 1e-9)
    throw RangeError("BrownianPath::eval: time outside window");
  auto k = static_cast<std::int64_t>(std::floor(pos));
  if (k < 0) k = 0;
  if (k >= n_) k = n_ - 1;
  double w = pos - static_cast<double>(k);
  if (w < 1e-9) {
    w = 0.0;
  } else if (w > 1.0 - 1e-9) {
    w = 0.0;
    ++k;
  }
  const double a = value(k, j);
  if (w == 0.0) return a;
  return a + w * (value(k + 1, j) - a);
}

BrownianPath BrownianPath::shifted(ShiftIndex k) const {
  const std::int64_t new_origin = origin_ + k.k;
  if (new_origin < 0 || new_origin > n_)
    throw RangeError("wiener_shift: shifted origin outside the sampled window");
  BrownianPath p = *this;
  p.origin_ = new_origin;
  return p;
}

void BrownianPath::dump_csv(std::ostream& os) const {
  CsvWriter csv(os);
  std::vector<std::string> cols{"time"};
  for (int j = 0; j < m_; ++j) cols.push_back("W" + std::to_string(j + 1));
  csv.header(cols);
  std::vector<double> row(static_cast<std::size_t>(m_) + 1);
  for (std::int64_t i = 0; i <= n_; ++i) {
    row[0] = time(i);
    for (int j = 0; j < m_; ++j) row[static_cast<std::size_t>(j) + 1] = value(i, j);
    csv.row(row);
  }
}

BrownianPath sample_path(std::uint64_t seed, const TimeGrid& grid, int drivers) {
  return BrownianPath::sample(seed, grid, drivers);
}

BrownianPath wiener_shift(const BrownianPath& path, ShiftIndex k) { return path.shifted(k); }

}  // namespace sdde
