#include "sdde/rds.hpp"

#include <algorithm>
#include <cmath>

#include "sdde/errors.hpp"

namespace sdde {

namespace {

// Autonomy probe: H and b evaluated at two distinct times on a few segments.
void require_autonomous(const SystemSpec& sys) {
  Rng rng(0x4155544fULL);
  Vec a(static_cast<std::size_t>(sys.dim)), b(static_cast<std::size_t>(sys.dim));
  for (int n = 0; n < 3; ++n) {
    std::vector<double> flat(static_cast<std::size_t>(4) * sys.dim);
    for (double& v : flat) v = rng.uniform(0.0, 1.5);
    Segment seg(sys.delay, sys.dim, std::move(flat));
    sys.eval_H(0.0, seg, a);
    sys.eval_H(0.731, seg, b);
    for (int i = 0; i < sys.dim; ++i)
      if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)])
        throw UnsupportedError("Cocycle: time-dependent functional drift is not supported");
    Vec x = seg.endpoint();
    sys.drift.eval(0.0, x, a);
    sys.drift.eval(0.731, x, b);
    for (int i = 0; i < sys.dim; ++i)
      if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)])
        throw UnsupportedError("Cocycle: time-dependent instantaneous drift is not supported");
  }
}

}  // namespace

Cocycle::Cocycle(SystemSpec sys, std::uint64_t base_seed, double t_minus, double t_plus, double dt)
    : sys_(std::move(sys)), seed_(base_seed), dt_(dt) {
  require_autonomous(sys_);
  path_ = BrownianPath::sample_window(base_seed, t_minus, t_plus, dt,
                                      std::max(sys_.diffusion.drivers, 1));
}

ShiftIndex Cocycle::steps_of(double t) const {
  if (t == 0.0) return ShiftIndex{0};
  return ShiftIndex{exact_ratio(t, dt_, "cocycle time/dt")};
}

SddeRun Cocycle::run(double t, ShiftIndex shift, const Segment& eta) const {
  if (t < 0) throw RangeError("cocycle: t must be >= 0");
  BrownianPath shifted = path_.shifted(shift);
  return solve_direct(sys_, shifted, 0.0, eta, t, dt_);
}

Segment Cocycle::apply(double t, ShiftIndex shift, const Segment& eta) const {
  if (t == 0.0) return eta;
  SddeRun r = run(t, shift, eta);
  if (r.blowup) throw NumericError("cocycle: trajectory blew up before time t");
  return segment_at(r.trajectory, t, sys_.delay);
}

Segment cocycle_apply(const Cocycle& c, double t, ShiftIndex shift, const Segment& eta) {
  return c.apply(t, shift, eta);
}

VerificationReport check_cocycle_property(const Cocycle& c, double t, double s,
                                          const std::vector<Segment>& etas) {
  VerificationReport rep;
  rep.check = "cocycle_property";
  rep.tolerances["max_deviation_allowed"] = 0.0;

  const ShiftIndex shift_s = c.steps_of(s);
  double max_dev = 0.0;
  for (const Segment& eta : etas) {
    const Segment lhs = c.apply(t + s, ShiftIndex{0}, eta);
    const Segment mid = c.apply(s, ShiftIndex{0}, eta);
    const Segment rhs = c.apply(t, shift_s, mid);
    if (lhs.sample_count() != rhs.sample_count())
      throw ShapeError("check_cocycle_property: sample layout mismatch");
    for (int k = 0; k < lhs.sample_count(); ++k)
      for (int i = 0; i < lhs.dim(); ++i)
        max_dev = std::max(max_dev, std::fabs(lhs.sample(k, i) - rhs.sample(k, i)));
  }
  rep.statistics["max_deviation"] = max_dev;
  rep.statistics["segments_tested"] = static_cast<double>(etas.size());
  rep.status = max_dev == 0.0 ? CheckStatus::PASS : CheckStatus::FAIL;
  if (rep.status == CheckStatus::FAIL) {
    Counterexample ce;
    ce.description = "phi(t+s, w) != phi(t, theta_s w) . phi(s, w)";
    ce.value = max_dev;
    rep.counterexamples.push_back(std::move(ce));
  }
  return rep;
}

VerificationReport check_order_preserving(const Cocycle& c, double t, const DomainSpec& dom,
                                          const OrderPreservationOptions& opts) {
  VerificationReport rep;
  rep.check = "order_preserving";
  rep.tolerances["disc_tol"] = opts.disc_tol;

  if (opts.gate_on_quasimonotone) {
    QuasimonotoneOptions qopts;
    qopts.n_pairs = opts.quasimonotone_pairs;
    qopts.seed = opts.seed ^ 0x71ULL;
    qopts.segment_samples = opts.segment_samples;
    VerificationReport gate = check_quasimonotone(c.system().H, c.system().dim, c.system().delay,
                                                  dom, qopts);
    if (gate.status == CheckStatus::FAIL) {
      rep.status = CheckStatus::FAIL;
      rep.notes.push_back("quasimonotonicity gate failed; order preservation is not expected");
      rep.statistics["gate_worst_margin"] = gate.statistics.at("worst_margin");
      return rep;
    }
  }

  Rng rng(opts.seed);
  double worst = 0.0;
  for (int n = 0; n < opts.n_pairs; ++n) {
    auto [lower, upper] = sample_ordered_segments(dom, rng, c.system().delay, opts.segment_samples);
    const Segment lo_out = c.apply(t, ShiftIndex{0}, lower);
    const Segment up_out = c.apply(t, ShiftIndex{0}, upper);
    for (int k = 0; k < lo_out.sample_count(); ++k)
      for (int i = 0; i < lo_out.dim(); ++i)
        worst = std::max(worst, lo_out.sample(k, i) - up_out.sample(k, i));
  }
  rep.statistics["worst_violation"] = worst;
  rep.statistics["pairs_tested"] = static_cast<double>(opts.n_pairs);
  if (worst > opts.disc_tol) {
    rep.status = CheckStatus::FAIL;
    Counterexample ce;
    ce.description = "ordered initial segments produced disordered states";
    ce.value = worst;
    rep.counterexamples.push_back(std::move(ce));
  }
  return rep;
}

AttractorEstimate pullback_estimate(const Cocycle& c, const std::vector<Segment>& initial_family,
                                    const Vec& pullback_times, double diam_tol) {
  if (initial_family.empty()) throw ShapeError("pullback_estimate: empty initial family");
  AttractorEstimate est;

  std::vector<Segment> images;
  for (double t : pullback_times) {
    const ShiftIndex back{-c.steps_of(t).k};
    images.clear();
    for (const Segment& eta : initial_family) images.push_back(c.apply(t, back, eta));

    const int count = images[0].sample_count();
    const int d = images[0].dim();
    std::vector<double> lo(static_cast<std::size_t>(count) * d, 1e300);
    std::vector<double> hi(static_cast<std::size_t>(count) * d, -1e300);
    for (const Segment& seg : images)
      for (int k = 0; k < count; ++k)
        for (int i = 0; i < d; ++i) {
          const double v = seg.sample(k, i);
          auto& l = lo[static_cast<std::size_t>(k) * d + i];
          auto& h = hi[static_cast<std::size_t>(k) * d + i];
          l = std::min(l, v);
          h = std::max(h, v);
        }
    double diam = 0.0;
    for (std::size_t idx = 0; idx < lo.size(); ++idx) diam = std::max(diam, hi[idx] - lo[idx]);
    est.diameter_history.emplace_back(t, diam);
    est.lower_env = Segment(images[0].delay(), d, std::move(lo));
    est.upper_env = Segment(images[0].delay(), d, std::move(hi));
  }

  const std::size_t n = est.diameter_history.size();
  if (n >= 3) {
    const double d0 = est.diameter_history[n - 3].second;
    const double d1 = est.diameter_history[n - 2].second;
    const double d2 = est.diameter_history[n - 1].second;
    est.converged = (d0 >= d1 && d1 >= d2) || (d0 <= diam_tol && d1 <= diam_tol && d2 <= diam_tol);
  } else if (n >= 1) {
    est.converged = est.diameter_history.back().second <= diam_tol;
  }
  return est;
}

void BiochemParams::validate() const {
  const int d = dim();
  if (d == 0 || sigma.size() != alpha.size()) throw ShapeError("BiochemParams: size mismatch");
  for (double v : alpha)
    if (!(v > 0)) throw ShapeError("BiochemParams: alpha must be positive");
  for (double v : sigma)
    if (v < 0) throw ShapeError("BiochemParams: sigma must be nonnegative");
  if (L.size() != static_cast<std::size_t>(d)) throw ShapeError("BiochemParams: need one measure per level");
  for (const DelayMeasure& m : L) m.validate(delay);
  if (b_const < 0 || a < 0) throw ShapeError("BiochemParams: need a, b >= 0");
}

double BiochemParams::g(double u) const {
  const double up = std::max(u, 0.0);
  switch (g_kind) {
    case GKind::HILL: return b_const * (0.5 + 0.5 * up / (1.0 + up));
    case GKind::AFFINE: return a * up + b_const;
    case GKind::CONSTANT: return g_value >= 0 ? g_value : b_const;
  }
  return b_const;
}

namespace {

DiffusionSpec biochem_diffusion(const BiochemParams& p) {
  DiffusionSpec diff;
  diff.drivers = p.dim();
  diff.diagonal = true;
  diff.label = "sigma_j x_j (Stratonovich)";
  diff.coeff = [sigma = p.sigma](int i, int j, const Vec& x) {
    return i == j ? sigma[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] : 0.0;
  };
  diff.coeff_deriv = [sigma = p.sigma](int i, int j, int k, const Vec&) {
    return (i == j && k == i) ? sigma[static_cast<std::size_t>(i)] : 0.0;
  };
  AnalyticFlowForm form;
  form.kind = AnalyticFlowForm::Kind::LINEAR_STRATONOVICH;
  form.params = p.sigma;
  diff.closed_form = form;
  return diff;
}

SystemSpec biochem_common(const BiochemParams& p, bool affine) {
  p.validate();
  SystemSpec sys;
  sys.dim = p.dim();
  sys.delay = p.delay;
  sys.name = affine ? "biochem-affine" : "biochem";
  sys.diffusion = biochem_diffusion(p);
  sys.drift.interpretation = Interpretation::STRATONOVICH;  // b == 0 in Stratonovich form
  sys.H = [p, affine](double, const Segment& eta, Vec& out) {
    const int d = p.dim();
    const double feedback = p.L[static_cast<std::size_t>(d - 1)].apply(eta, d - 1);
    const double g0 = affine ? p.a * std::max(feedback, 0.0) + p.b_const : p.g(feedback);
    out[0] = g0 - p.alpha[0] * eta.endpoint(0);
    for (int j = 1; j < d; ++j)
      out[static_cast<std::size_t>(j)] =
          p.L[static_cast<std::size_t>(j - 1)].apply(eta, j - 1) -
          p.alpha[static_cast<std::size_t>(j)] * eta.endpoint(j);
  };
  return sys;
}

}  // namespace

SystemSpec make_biochem_system(const BiochemParams& p) { return biochem_common(p, false); }
SystemSpec make_biochem_affine(const BiochemParams& p) { return biochem_common(p, true); }

EquilibriumTable::EquilibriumTable(const BrownianPath* path, std::int64_t stride, int dim)
    : path_(path), stride_(stride), dim_(dim) {
  const std::int64_t quad_nodes = path->n_steps() / stride + 1;
  values_.assign(static_cast<std::size_t>(quad_nodes) * dim, 0.0);
}

double EquilibriumTable::value(std::int64_t path_node, int j) const {
  const std::int64_t q = path_node / stride_;
  if (q * stride_ != path_node) throw RangeError("EquilibriumTable: node off the quadrature grid");
  return values_[static_cast<std::size_t>(q) * dim_ + j];
}

double EquilibriumTable::value_at_time(double u, int j) const {
  const double dtq = path_->dt() * static_cast<double>(stride_);
  const double pos = (u - path_->t_start()) / dtq;
  const std::int64_t last = static_cast<std::int64_t>(values_.size()) / dim_ - 1;
  if (pos < -1e-9 || pos > static_cast<double>(last) + 1e-9)
    throw RangeError("EquilibriumTable: time outside tabulated window");
  auto k = static_cast<std::int64_t>(std::floor(pos));
  if (k < 0) k = 0;
  if (k >= last) k = last - 1;
  double w = pos - static_cast<double>(k);
  if (w < 1e-9) w = 0.0;
  else if (w > 1.0 - 1e-9) {
    w = 0.0;
    ++k;
  }
  const double a = values_[static_cast<std::size_t>(k) * dim_ + j];
  if (w == 0.0) return a;
  return a + w * (values_[static_cast<std::size_t>(k + 1) * dim_ + j] - a);
}

Segment EquilibriumTable::segment_at(double u0, double delay, double dt) const {
  const auto n = exact_ratio(delay, dt, "equilibrium segment delay/dt");
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n + 1) * dim_);
  for (std::int64_t k = 0; k <= n; ++k) {
    const double u = u0 + (static_cast<double>(k) - static_cast<double>(n)) * dt;
    for (int j = 0; j < dim_; ++j) flat.push_back(value_at_time(u, j));
  }
  return Segment(delay, dim_, std::move(flat));
}

EquilibriumTable biochem_equilibrium_table(const BiochemParams& p, const BrownianPath& path,
                                           double T_trunc, double dt, double quad_tol) {
  p.validate();
  if (p.a != 0.0)
    throw UnsupportedError("biochem_equilibrium: closed-form equilibrium needs a == 0");
  if (path.t_start() > -T_trunc - p.delay + 1e-9)
    throw RangeError("biochem_equilibrium: path window must reach back T_trunc + delay");
  const std::int64_t stride = exact_ratio(dt, path.dt(), "equilibrium dt/path dt");
  if (path.origin() % stride != 0)
    throw ShapeError("biochem_equilibrium: quadrature grid must contain time 0");

  const int d = p.dim();
  EquilibriumTable table(&path, stride, d);
  const std::int64_t quad_nodes = path.n_steps() / stride + 1;

  // exp(alpha_j * u - sigma_j * W_j(u)) blows up far in the past; the
  // integrand rho * g is what decays. Work per level with the running
  // integral J_j(u) and v_j(theta_u) = exp(-alpha_j u + sigma_j W_j) J_j(u).
  std::vector<double> g_prev(static_cast<std::size_t>(quad_nodes), p.b_const);  // g_0 == b
  double worst_tail = 0.0;

  for (int j = 0; j < d; ++j) {
    const double alpha = p.alpha[static_cast<std::size_t>(j)];
    const double sigma = p.sigma[static_cast<std::size_t>(j)];
    auto rho = [&](std::int64_t q) {
      const double u = path.time(q * stride);
      return std::exp(alpha * u - sigma * path.value(q * stride, j));
    };
    worst_tail = std::max(worst_tail, g_prev[0] * rho(0) / alpha);

    double J = 0.0;
    double f_prev = g_prev[0] * rho(0);
    for (std::int64_t q = 0; q < quad_nodes; ++q) {
      if (q > 0) {
        const double f = g_prev[static_cast<std::size_t>(q)] * rho(q);
        J += 0.5 * dt * (f_prev + f);
        f_prev = f;
      }
      const double u = path.time(q * stride);
      table.values_[static_cast<std::size_t>(q) * d + j] =
          std::exp(-alpha * u + sigma * path.value(q * stride, j)) * J;
    }

    // g_j(u) = L_j applied to tau -> v_j(theta_{u+tau}); feeds the next level
    if (j + 1 < d) {
      const DelayMeasure& L = p.L[static_cast<std::size_t>(j)];
      for (std::int64_t q = 0; q < quad_nodes; ++q) {
        const double u = path.time(q * stride);
        double s = 0.0;
        bool in_window = true;
        for (std::size_t k = 0; k < L.taps.size(); ++k) {
          const double uu = u + L.taps[k];
          if (uu < path.t_start() - 1e-12) {
            in_window = false;
            break;
          }
          s += L.weights[k] * table.value_at_time(uu, j);
        }
        g_prev[static_cast<std::size_t>(q)] = in_window ? s : 0.0;
      }
    }
  }

  table.tail_ = worst_tail;
  table.reliable_from_ = path.t_start() + T_trunc + p.delay;
  if (worst_tail > quad_tol)
    throw NumericError("biochem_equilibrium: truncation tail estimate " +
                       std::to_string(worst_tail) + " exceeds quad_tol; increase T_trunc");
  return table;
}

Segment biochem_equilibrium(const BiochemParams& p, const BrownianPath& path, double T_trunc,
                            double dt, double quad_tol) {
  EquilibriumTable table = biochem_equilibrium_table(p, path, T_trunc, dt, quad_tol);
  return table.segment_at(0.0, p.delay, dt);
}

VerificationReport check_super_equilibrium(const Cocycle& c, const EquilibriumTable& v,
                                           double lambda, double t, double disc_tol) {
  if (lambda < 1.0) throw RangeError("check_super_equilibrium: lambda must be >= 1");
  VerificationReport rep;
  rep.check = "super_equilibrium";
  rep.tolerances["disc_tol"] = disc_tol;
  rep.tolerances["lambda"] = lambda;

  if (v.path().seed() != c.path().seed() || v.path().dt() != c.path().dt())
    throw ShapeError("check_super_equilibrium: equilibrium and cocycle must share the path");

  const double r = c.system().delay;
  Segment v_seg = v.segment_at(0.0, r, c.dt());
  std::vector<double> scaled(v_seg.data(),
                             v_seg.data() + static_cast<std::size_t>(v_seg.sample_count()) * v_seg.dim());
  for (double& x : scaled) x *= lambda;
  Segment initial(r, v_seg.dim(), std::move(scaled));

  const Segment out = c.apply(t, ShiftIndex{0}, initial);

  double worst = -1e300;  // worst violation; negative means margin everywhere
  const auto n = static_cast<std::int64_t>(out.sample_count()) - 1;
  for (std::int64_t k = 0; k <= n; ++k) {
    const double tau = (static_cast<double>(k) - static_cast<double>(n)) * c.dt();
    for (int j = 0; j < out.dim(); ++j) {
      const double bound = lambda * v.value_at_time(t + tau, j);
      worst = std::max(worst, out.sample(static_cast<int>(k), j) - bound);
    }
  }
  rep.statistics["worst_violation"] = worst;
  rep.statistics["margin"] = -worst;
  if (worst > disc_tol) {
    rep.status = CheckStatus::FAIL;
    Counterexample ce;
    ce.description = "cocycle image exceeds the scaled affine equilibrium";
    ce.value = worst;
    rep.counterexamples.push_back(std::move(ce));
  }
  return rep;
}

}  // namespace sdde
