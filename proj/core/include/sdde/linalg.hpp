#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sdde/errors.hpp"

namespace sdde {

using Vec = std::vector<double>;

/// Row-major d x d matrix stored flat.
struct Mat {
  int n = 0;
  std::vector<double> a;

  Mat() = default;
  explicit Mat(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
  static Mat identity(int n_) {
    Mat m(n_);
    for (int i = 0; i < n_; ++i) m(i, i) = 1.0;
    return m;
  }
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::fabs(v));
  return s;
}

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y(static_cast<std::size_t>(m.n), 0.0);
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m(i, j) * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.n);
  for (int i = 0; i < a.n; ++i)
    for (int k = 0; k < a.n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < a.n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// Solve m x = rhs by LU with partial pivoting. Dimensions here are tiny
/// (the spatial dimension of the system), so no external solver is needed.
inline Vec solve_linear(Mat m, Vec rhs) {
  const int n = m.n;
  std::vector<int> piv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) piv[static_cast<std::size_t>(i)] = i;
  for (int col = 0; col < n; ++col) {
    int best = col;
    double bestv = std::fabs(m(col, col));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::fabs(m(r, col));
      if (v > bestv) {
        bestv = v;
        best = r;
      }
    }
    if (bestv == 0.0) throw NumericError("solve_linear: singular matrix");
    if (best != col) {
      for (int j = 0; j < n; ++j) std::swap(m(col, j), m(best, j));
      std::swap(rhs[static_cast<std::size_t>(col)], rhs[static_cast<std::size_t>(best)]);
    }
    const double d = m(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = m(r, col) / d;
      if (f == 0.0) continue;
      m(r, col) = 0.0;
      for (int j = col + 1; j < n; ++j) m(r, j) -= f * m(col, j);
      rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
    }
  }
  Vec x(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= m(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s / m(i, i);
  }
  return x;
}

/// Least-squares slope of y against x (used for empirical order estimates).
inline double regression_slope(const Vec& x, const Vec& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace sdde
