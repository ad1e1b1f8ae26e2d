#pragma once

#include <algorithm>
#include <cstdint>

namespace sdde::detail {

// Linear interpolation at fractional sample position pos in [0, count-1].
// Positions within 1e-9 of an integer snap to the sample so node queries
// reproduce stored values bitwise.
inline void eval_at_position(const double* samples, std::int64_t count, int dim, double pos,
                             double* out) {
  if (pos <= 0.0) {
    std::copy(samples, samples + dim, out);
    return;
  }
  if (pos >= static_cast<double>(count - 1)) {
    const double* p = samples + static_cast<std::size_t>(count - 1) * dim;
    std::copy(p, p + dim, out);
    return;
  }
  auto j = static_cast<std::int64_t>(pos);
  double w = pos - static_cast<double>(j);
  if (w < 1e-9) {
    w = 0.0;
  } else if (w > 1.0 - 1e-9) {
    w = 0.0;
    ++j;
  }
  const double* p0 = samples + static_cast<std::size_t>(j) * dim;
  if (w == 0.0) {
    std::copy(p0, p0 + dim, out);
    return;
  }
  const double* p1 = p0 + dim;
  for (int i = 0; i < dim; ++i) out[i] = p0[i] + w * (p1[i] - p0[i]);
}

}  // namespace sdde::detail
