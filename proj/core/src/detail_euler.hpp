#pragma once

// Private Euler-Maruyama step kernel shared by the flow and the direct
// solver so that a delay-free system produces bitwise identical recursions
// through either entry point.

#include <cmath>

#include "sdde/flow.hpp"
#include "sdde/linalg.hpp"

namespace sdde::detail {

// out_k = x_k + drift_k*dt + sum_j m(k,j,x)*dW_j. Returns false when the
// result leaves the guard box or is not finite.
inline bool euler_update(const DiffusionSpec& diff, const Vec& x, const Vec& drift_total,
                         double dt, const double* dW, Vec& out) {
  const int d = static_cast<int>(x.size());
  bool ok = true;
  for (int k = 0; k < d; ++k) {
    double v = x[static_cast<std::size_t>(k)] + drift_total[static_cast<std::size_t>(k)] * dt;
    if (!diff.is_zero())
      for (int j = 0; j < diff.drivers; ++j) v += diff.coeff(k, j, x) * dW[j];
    out[static_cast<std::size_t>(k)] = v;
    if (!(std::fabs(v) <= kBlowupGuard)) ok = false;  // catches NaN too
  }
  return ok;
}

}  // namespace sdde::detail
