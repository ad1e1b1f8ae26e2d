#include "sdde/flow.hpp"

#include <cmath>

#include "detail_euler.hpp"
#include "sdde/errors.hpp"

namespace sdde {

double DiffusionSpec::deriv(int i, int j, int k, const Vec& x) const {
  if (is_zero()) return 0.0;
  if (coeff_deriv) return coeff_deriv(i, j, k, x);
  const double h = fd_step(x);
  Vec xp = x, xm = x;
  xp[static_cast<std::size_t>(k)] += h;
  xm[static_cast<std::size_t>(k)] -= h;
  return (coeff(i, j, xp) - coeff(i, j, xm)) / (2.0 * h);
}

void DriftSpec::eval(double t, const Vec& x, Vec& out) const {
  out.assign(x.size(), 0.0);
  if (b) b(t, x, out);
}

void DriftSpec::jac(double t, const Vec& x, Mat& out) const {
  const int d = static_cast<int>(x.size());
  if (jacobian) {
    out = Mat(d);
    jacobian(t, x, out);
    return;
  }
  out = Mat(d);
  if (!b) return;
  const double h = fd_step(x);
  Vec fp(x.size()), fm(x.size());
  Vec xp = x, xm = x;
  for (int k = 0; k < d; ++k) {
    xp[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + h;
    xm[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - h;
    eval(t, xp, fp);
    eval(t, xm, fm);
    for (int i = 0; i < d; ++i)
      out(i, k) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
    xp[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
    xm[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
  }
}

namespace {

DriftSpec converted_drift(const DriftSpec& drift, const DiffusionSpec& diff, double sign,
                          Interpretation tag) {
  DriftSpec out;
  out.interpretation = tag;
  if (diff.is_zero()) {
    out.b = drift.b;
    out.jacobian = drift.jacobian;
    return out;
  }
  out.b = [base = drift.b, diff, sign](double t, const Vec& x, Vec& o) {
    const int d = static_cast<int>(x.size());
    o.assign(x.size(), 0.0);
    if (base) base(t, x, o);
    for (int i = 0; i < d; ++i) {
      double corr = 0.0;
      for (int j = 0; j < diff.drivers; ++j)
        for (int k = 0; k < d; ++k) corr += diff.coeff(k, j, x) * diff.deriv(i, j, k, x);
      o[static_cast<std::size_t>(i)] += sign * 0.5 * corr;
    }
  };
  return out;
}

}  // namespace

DriftSpec stratonovich_to_ito(const DriftSpec& drift, const DiffusionSpec& diff) {
  return converted_drift(drift, diff, +1.0, Interpretation::ITO);
}

DriftSpec ito_to_stratonovich(const DriftSpec& drift, const DiffusionSpec& diff) {
  return converted_drift(drift, diff, -1.0, Interpretation::STRATONOVICH);
}

DriftSpec effective_ito_drift(const DriftSpec& drift, const DiffusionSpec& diff) {
  if (drift.interpretation == Interpretation::ITO) return drift;
  return stratonovich_to_ito(drift, diff);
}

DriftSpec effective_stratonovich_drift(const DriftSpec& drift, const DiffusionSpec& diff) {
  if (drift.interpretation == Interpretation::STRATONOVICH) return drift;
  return ito_to_stratonovich(drift, diff);
}

FlowResult flow_evolve(const DriftSpec& drift, const DiffusionSpec& diff, const BrownianPath& path,
                       double s, double t, const Vec& x, double dt) {
  if (t < s) throw RangeError("flow_evolve: t < s");
  const int d = static_cast<int>(x.size());
  const std::int64_t stride = exact_ratio(dt, path.dt(), "flow_evolve dt");
  const std::int64_t node_s = path.node_at(s);
  const std::int64_t node_t = path.node_at(t);
  const std::int64_t n = (node_t - node_s) / stride;
  if (n * stride != node_t - node_s)
    throw ShapeError("flow_evolve: [s,t] is not a whole number of dt steps");

  const DriftSpec ito = effective_ito_drift(drift, diff);

  FlowResult res;
  res.point = x;
  res.jacobian_is_diagonal = diff.diagonal;
  if (diff.diagonal) {
    res.jacobian.assign(static_cast<std::size_t>(d), 1.0);
  } else {
    Mat id = Mat::identity(d);
    res.jacobian = id.a;
  }

  Vec bbuf(static_cast<std::size_t>(d)), next(static_cast<std::size_t>(d));
  Vec dW(static_cast<std::size_t>(std::max(diff.drivers, 1)));
  Mat db;

  for (std::int64_t q = 0; q < n; ++q) {
    const double tq = s + static_cast<double>(q) * dt;
    const Vec& cur = res.point;
    for (int j = 0; j < diff.drivers; ++j)
      dW[static_cast<std::size_t>(j)] =
          path.increment(node_s + q * stride, node_s + (q + 1) * stride, j);

    ito.eval(tq, cur, bbuf);

    // derivative recursion before the point moves
    if (diff.diagonal) {
      if (!ito.is_zero()) ito.jac(tq, cur, db);
      for (int i = 0; i < d; ++i) {
        double factor = 1.0;
        if (!ito.is_zero()) factor += db(i, i) * dt;
        for (int j = 0; j < diff.drivers; ++j)
          factor += diff.deriv(i, j, i, cur) * dW[static_cast<std::size_t>(j)];
        res.jacobian[static_cast<std::size_t>(i)] *= factor;
      }
    } else {
      Mat step(d);
      for (int i = 0; i < d; ++i) step(i, i) = 1.0;
      if (!ito.is_zero()) {
        ito.jac(tq, cur, db);
        for (int i = 0; i < d; ++i)
          for (int k = 0; k < d; ++k) step(i, k) += db(i, k) * dt;
      }
      for (int j = 0; j < diff.drivers; ++j)
        for (int i = 0; i < d; ++i)
          for (int k = 0; k < d; ++k)
            step(i, k) += diff.deriv(i, j, k, cur) * dW[static_cast<std::size_t>(j)];
      Mat J(d);
      J.a = res.jacobian;
      res.jacobian = matmul(step, J).a;
    }

    if (!detail::euler_update(diff, cur, bbuf, dt, dW.data(), next)) {
      res.point = next;
      res.blowup = true;
      return res;
    }
    res.point = next;
  }
  return res;
}

Vec flow_inverse(const DriftSpec& drift, const DiffusionSpec& diff, const BrownianPath& path,
                 double u, const Vec& x, double dt) {
  if (u < 0) throw RangeError("flow_inverse: u must be >= 0 (flow anchored at time 0)");
  const int d = static_cast<int>(x.size());
  const std::int64_t stride = exact_ratio(dt, path.dt(), "flow_inverse dt");
  const std::int64_t node_0 = path.node_at(0.0);
  const std::int64_t node_u = path.node_at(u);
  const std::int64_t n = (node_u - node_0) / stride;
  if (n * stride != node_u - node_0)
    throw ShapeError("flow_inverse: [0,u] is not a whole number of dt steps");

  const DriftSpec ito = effective_ito_drift(drift, diff);

  Vec y = x, z(static_cast<std::size_t>(d)), bbuf(static_cast<std::size_t>(d));
  Vec dW(static_cast<std::size_t>(std::max(diff.drivers, 1)));
  for (std::int64_t q = n - 1; q >= 0; --q) {
    const double tq = static_cast<double>(q) * dt;
    for (int j = 0; j < diff.drivers; ++j)
      dW[static_cast<std::size_t>(j)] =
          path.increment(node_0 + q * stride, node_0 + (q + 1) * stride, j);

    // solve y = z + f(tq,z)dt + m(z)dW for z by fixed point, seeded at y
    z = y;
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
      ito.eval(tq, z, bbuf);
      double shift = 0.0;
      for (int k = 0; k < d; ++k) {
        double v = y[static_cast<std::size_t>(k)] - bbuf[static_cast<std::size_t>(k)] * dt;
        for (int j = 0; j < diff.drivers; ++j)
          v -= diff.eval(k, j, z) * dW[static_cast<std::size_t>(j)];
        shift = std::max(shift, std::fabs(v - z[static_cast<std::size_t>(k)]));
        z[static_cast<std::size_t>(k)] = v;
      }
      if (shift <= 1e-12 * (1.0 + norm_inf(z))) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NumericError("flow_inverse: step inversion did not converge at t=" +
                         std::to_string(tq) + " (|x|=" + std::to_string(norm_inf(z)) + ")");
    y = z;
  }
  return y;
}

Vec gbm_flow_exact(const Vec& sigma, const BrownianPath& path, double t, const Vec& x) {
  Vec out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = x[j] * std::exp(sigma[j] * path.eval(t, static_cast<int>(j)));
  return out;
}

Vec gbm_flow_derivative(const Vec& sigma, const BrownianPath& path, double t) {
  Vec out(sigma.size());
  for (std::size_t j = 0; j < sigma.size(); ++j)
    out[j] = std::exp(sigma[j] * path.eval(t, static_cast<int>(j)));
  return out;
}

Vec gbm_flow_inverse(const Vec& sigma, const BrownianPath& path, double t, const Vec& x) {
  Vec out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = x[j] * std::exp(-sigma[j] * path.eval(t, static_cast<int>(j)));
  return out;
}

AnalyticFlow::AnalyticFlow(AnalyticFlowForm form, int dim, const BrownianPath* path)
    : form_(std::move(form)), dim_(dim), path_(path) {
  using Kind = AnalyticFlowForm::Kind;
  if (form_.kind == Kind::ADDITIVE_CONSTANT &&
      form_.params.size() != static_cast<std::size_t>(dim) * path_->drivers())
    throw ShapeError("AnalyticFlow: additive-constant form needs dim*drivers coefficients");
  if (form_.kind == Kind::LINEAR_STRATONOVICH && form_.params.size() != static_cast<std::size_t>(dim))
    throw ShapeError("AnalyticFlow: linear form needs one sigma per coordinate");
}

void AnalyticFlow::value(double t, const Vec& z, Vec& out) const {
  using Kind = AnalyticFlowForm::Kind;
  out.resize(z.size());
  switch (form_.kind) {
    case Kind::ZERO:
      out = z;
      break;
    case Kind::ADDITIVE_CONSTANT: {
      const int m = path_->drivers();
      for (int i = 0; i < dim_; ++i) {
        double v = z[static_cast<std::size_t>(i)];
        for (int j = 0; j < m; ++j)
          v += form_.params[static_cast<std::size_t>(i) * m + j] * path_->eval(t, j);
        out[static_cast<std::size_t>(i)] = v;
      }
      break;
    }
    case Kind::LINEAR_STRATONOVICH:
      for (int i = 0; i < dim_; ++i)
        out[static_cast<std::size_t>(i)] =
            z[static_cast<std::size_t>(i)] *
            std::exp(form_.params[static_cast<std::size_t>(i)] * path_->eval(t, i));
      break;
  }
}

void AnalyticFlow::deriv_diag(double t, Vec& out) const {
  using Kind = AnalyticFlowForm::Kind;
  out.assign(static_cast<std::size_t>(dim_), 1.0);
  if (form_.kind == Kind::LINEAR_STRATONOVICH)
    for (int i = 0; i < dim_; ++i)
      out[static_cast<std::size_t>(i)] =
          std::exp(form_.params[static_cast<std::size_t>(i)] * path_->eval(t, i));
}

void AnalyticFlow::inverse(double t, const Vec& x, Vec& out) const {
  using Kind = AnalyticFlowForm::Kind;
  out.resize(x.size());
  switch (form_.kind) {
    case Kind::ZERO:
      out = x;
      break;
    case Kind::ADDITIVE_CONSTANT: {
      const int m = path_->drivers();
      for (int i = 0; i < dim_; ++i) {
        double v = x[static_cast<std::size_t>(i)];
        for (int j = 0; j < m; ++j)
          v -= form_.params[static_cast<std::size_t>(i) * m + j] * path_->eval(t, j);
        out[static_cast<std::size_t>(i)] = v;
      }
      break;
    }
    case Kind::LINEAR_STRATONOVICH:
      for (int i = 0; i < dim_; ++i)
        out[static_cast<std::size_t>(i)] =
            x[static_cast<std::size_t>(i)] *
            std::exp(-form_.params[static_cast<std::size_t>(i)] * path_->eval(t, i));
      break;
  }
}

}  // namespace sdde
