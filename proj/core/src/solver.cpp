#include "sdde/solver.hpp"

#include <algorithm>
#include <cmath>

#include "detail_euler.hpp"
#include "json_canonical.hpp"
#include "sdde/errors.hpp"
#include "sdde/io.hpp"
#include "sdde/rng.hpp"

namespace sdde {

const char* to_string(SolverId id) {
  return id == SolverId::DIRECT ? "direct" : "conjugated";
}

namespace {

// Shared scaffolding of both solvers: grid alignment checks, the trajectory
// with the initial segment pinned on [s-r, s] by pure index arithmetic, and
// the rolling history segment handed to H.
struct RunScaffold {
  std::int64_t history_steps = 0;  // L = r/dt
  std::int64_t n_steps = 0;        // solve steps
  std::int64_t stride = 0;         // path nodes per solver step
  std::int64_t base_node = 0;      // path node at time s
  Trajectory traj;
  Segment hist;

  RunScaffold(const SystemSpec& sys, const BrownianPath& path, double s, const Segment& eta,
              double T, double dt)
      : hist(1.0, 1, {0.0, 0.0}) {
    if (eta.dim() != sys.dim) throw ShapeError("solve: initial segment dim != system dim");
    if (std::fabs(eta.delay() - sys.delay) > 1e-9 * std::max(1.0, sys.delay))
      throw ShapeError("solve: initial segment delay != system delay");
    if (T < 0) throw RangeError("solve: negative horizon");

    history_steps = exact_ratio(sys.delay, dt, "solve delay/dt");
    const std::int64_t seg_stride = exact_ratio(eta.sample_spacing(), dt, "solve segment spacing/dt");
    if (seg_stride * static_cast<std::int64_t>(eta.sample_count() - 1) != history_steps)
      throw ShapeError("solve: dt does not tile the initial segment");
    stride = exact_ratio(dt, path.dt(), "solve dt/path dt");
    base_node = path.node_at(s);
    n_steps = static_cast<std::int64_t>(std::llround(T / dt));
    if (std::fabs(static_cast<double>(n_steps) * dt - T) > 1e-9 * std::max(1.0, T))
      throw ShapeError("solve: horizon T is not a whole number of dt steps");
    if (base_node + n_steps * stride > path.n_steps())
      throw RangeError("solve: [s, s+T] leaves the path window");

    traj = Trajectory(TimeGrid(s - sys.delay, dt, history_steps + n_steps), sys.dim);
    // pin the initial condition: node q*seg_stride copies sample q exactly,
    // nodes in between interpolate with index-arithmetic weights
    for (std::int64_t i = 0; i <= history_steps; ++i) {
      const std::int64_t q = i / seg_stride;
      const std::int64_t rem = i - q * seg_stride;
      double* dst = traj.node_ptr(i);
      if (rem == 0) {
        for (int c = 0; c < sys.dim; ++c) dst[c] = eta.sample(static_cast<int>(q), c);
      } else {
        const double w = static_cast<double>(rem) / static_cast<double>(seg_stride);
        for (int c = 0; c < sys.dim; ++c) {
          const double a = eta.sample(static_cast<int>(q), c);
          dst[c] = a + w * (eta.sample(static_cast<int>(q) + 1, c) - a);
        }
      }
    }

    hist = Segment(sys.delay, sys.dim,
                   std::vector<double>(static_cast<std::size_t>(history_steps + 1) * sys.dim, 0.0));
    load_history(history_steps);
  }

  // history segment ending at trajectory node `node`
  void load_history(std::int64_t node) {
    hist.overwrite_samples(traj.node_ptr(node - history_steps));
  }

  double step_time(double s, std::int64_t q, double dt) const {
    return s + static_cast<double>(q) * dt;
  }
};

}  // namespace

SddeRun solve_direct(const SystemSpec& sys, const BrownianPath& path, double s, const Segment& eta,
                     double T, double dt) {
  RunScaffold sc(sys, path, s, eta, T, dt);
  const DriftSpec ito = effective_ito_drift(sys.drift, sys.diffusion);
  const int d = sys.dim;

  SddeRun run;
  run.initial = eta;
  run.start = s;
  run.solver_id = SolverId::DIRECT;

  Vec x(static_cast<std::size_t>(d)), next(static_cast<std::size_t>(d));
  Vec hbuf(static_cast<std::size_t>(d)), bbuf(static_cast<std::size_t>(d)),
      drift_total(static_cast<std::size_t>(d));
  Vec dW(static_cast<std::size_t>(std::max(sys.diffusion.drivers, 1)));

  for (std::int64_t q = 0; q < sc.n_steps; ++q) {
    const std::int64_t node = sc.history_steps + q;
    const double tq = sc.step_time(s, q, dt);
    x.assign(sc.traj.node_ptr(node), sc.traj.node_ptr(node) + d);
    sc.load_history(node);

    sys.eval_H(tq, sc.hist, hbuf);
    ito.eval(tq, x, bbuf);
    for (int k = 0; k < d; ++k)
      drift_total[static_cast<std::size_t>(k)] =
          hbuf[static_cast<std::size_t>(k)] + bbuf[static_cast<std::size_t>(k)];
    for (int j = 0; j < sys.diffusion.drivers; ++j)
      dW[static_cast<std::size_t>(j)] =
          path.increment(sc.base_node + q * sc.stride, sc.base_node + (q + 1) * sc.stride, j);

    if (!detail::euler_update(sys.diffusion, x, drift_total, dt, dW.data(), next)) {
      sc.traj.truncate(node);
      run.blowup = true;
      break;
    }
    double* dst = sc.traj.node_ptr(node + 1);
    for (int k = 0; k < d; ++k) dst[k] = next[static_cast<std::size_t>(k)];
  }

  run.trajectory = std::move(sc.traj);
  return run;
}

namespace {

// Flow value and diagonal-or-full derivative at (t, z), recomputed by forward
// replay from time 0. Exact to Euler order; cost grows linearly in t, which
// the conjugated NUMERIC mode accepts at desk scale.
struct NumericFlowEval {
  Vec point;
  std::vector<double> jac;
  bool diagonal;
};

NumericFlowEval numeric_flow(const DriftSpec& drift, const DiffusionSpec& diff,
                             const BrownianPath& path, double t, const Vec& z, double dt) {
  FlowResult fr = flow_evolve(drift, diff, path, 0.0, t, z, dt);
  if (fr.blowup) throw NumericError("conjugated solve: flow replay left the guard bound");
  return {fr.point, fr.jacobian, fr.jacobian_is_diagonal};
}

}  // namespace

SddeRun solve_conjugated(const SystemSpec& sys, const BrownianPath& path, double s,
                         const Segment& eta, double T, double dt, FlowMode mode) {
  RunScaffold sc(sys, path, s, eta, T, dt);
  const int d = sys.dim;

  const AnalyticFlowForm* form = nullptr;
  if (mode == FlowMode::ANALYTIC) {
    if (!sys.diffusion.closed_form)
      throw UnsupportedError("solve_conjugated: system does not declare a closed-form flow");
    form = &*sys.diffusion.closed_form;
    if (!sys.drift.is_zero())
      throw UnsupportedError("solve_conjugated: closed-form flows require zero instantaneous drift");
    if (form->kind == AnalyticFlowForm::Kind::LINEAR_STRATONOVICH &&
        sys.drift.interpretation != Interpretation::STRATONOVICH)
      throw UnsupportedError(
          "solve_conjugated: linear closed form is the Stratonovich flow; tag the drift accordingly");
  }
  if (path.node_at(0.0) > sc.base_node)
    throw RangeError("solve_conjugated: path window must cover [0, s]");

  SddeRun run;
  run.initial = eta;
  run.start = s;
  run.solver_id = SolverId::CONJUGATED;

  Vec x(static_cast<std::size_t>(d)), hbuf(static_cast<std::size_t>(d));
  Vec zeta(static_cast<std::size_t>(d)), F(static_cast<std::size_t>(d)),
      deriv(static_cast<std::size_t>(d));
  Vec eta0 = eta.sample(eta.sample_count() - 1);

  AnalyticFlow af(form ? *form : AnalyticFlowForm{}, d, &path);
  if (mode == FlowMode::ANALYTIC) {
    af.inverse(s, eta0, zeta);
  } else {
    zeta = (s == 0.0) ? eta0 : flow_inverse(sys.drift, sys.diffusion, path, s, eta0, dt);
  }

  for (std::int64_t q = 0; q < sc.n_steps; ++q) {
    const std::int64_t node = sc.history_steps + q;
    const double tq = sc.step_time(s, q, dt);
    sc.load_history(node);
    sys.eval_H(tq, sc.hist, hbuf);

    if (mode == FlowMode::ANALYTIC) {
      af.deriv_diag(tq, deriv);
      for (int k = 0; k < d; ++k)
        F[static_cast<std::size_t>(k)] =
            hbuf[static_cast<std::size_t>(k)] / deriv[static_cast<std::size_t>(k)];
    } else {
      NumericFlowEval fe = numeric_flow(sys.drift, sys.diffusion, path, tq, zeta, dt);
      if (fe.diagonal) {
        for (int k = 0; k < d; ++k)
          F[static_cast<std::size_t>(k)] =
              hbuf[static_cast<std::size_t>(k)] / fe.jac[static_cast<std::size_t>(k)];
      } else {
        Mat J(d);
        J.a = fe.jac;
        F = solve_linear(J, hbuf);
      }
    }

    for (int k = 0; k < d; ++k)
      zeta[static_cast<std::size_t>(k)] =
          zeta[static_cast<std::size_t>(k)] + F[static_cast<std::size_t>(k)] * dt;

    const double tn = sc.step_time(s, q + 1, dt);
    if (mode == FlowMode::ANALYTIC) {
      af.value(tn, zeta, x);
    } else {
      x = numeric_flow(sys.drift, sys.diffusion, path, tn, zeta, dt).point;
    }

    bool ok = true;
    for (int k = 0; k < d; ++k)
      if (!(std::fabs(x[static_cast<std::size_t>(k)]) <= kBlowupGuard)) ok = false;
    if (!ok) {
      sc.traj.truncate(node);
      run.blowup = true;
      break;
    }
    double* dst = sc.traj.node_ptr(node + 1);
    for (int k = 0; k < d; ++k) dst[k] = x[static_cast<std::size_t>(k)];
  }

  run.trajectory = std::move(sc.traj);
  return run;
}

VerificationReport check_semiflow(const SystemSpec& sys, const BrownianPath& path, double s,
                                  double t, double u, const Segment& eta, double dt) {
  VerificationReport rep;
  rep.check = "semiflow";
  if (!(s <= t && t <= u)) throw RangeError("check_semiflow: need s <= t <= u");
  const auto k_t = static_cast<std::int64_t>(std::llround((t - s) / dt));
  if (std::fabs(s + static_cast<double>(k_t) * dt - t) > 1e-9 * std::max(1.0, std::fabs(t)))
    throw ShapeError("check_semiflow: t must be grid-aligned with s");
  const double t_exact = s + static_cast<double>(k_t) * dt;

  SddeRun full = solve_direct(sys, path, s, eta, u - s, dt);
  Segment at_t = segment_at(full.trajectory, t_exact, sys.delay);
  SddeRun restart = solve_direct(sys, path, t_exact, at_t, u - t_exact, dt);

  double max_dev = 0.0;
  std::int64_t nodes = 0;
  const std::int64_t offset = k_t;  // restart node i sits at full node offset + i
  const std::int64_t limit =
      std::min(restart.trajectory.grid().n_steps, full.trajectory.grid().n_steps - offset);
  for (std::int64_t i = 0; i <= limit; ++i) {
    for (int c = 0; c < sys.dim; ++c) {
      const double dev =
          std::fabs(restart.trajectory.value(i, c) - full.trajectory.value(offset + i, c));
      max_dev = std::max(max_dev, dev);
    }
    ++nodes;
  }

  rep.tolerances["max_deviation_allowed"] = 0.0;
  rep.statistics["max_deviation"] = max_dev;
  rep.statistics["nodes_compared"] = static_cast<double>(nodes);
  rep.statistics["blowup"] = (full.blowup || restart.blowup) ? 1.0 : 0.0;
  rep.status = (max_dev == 0.0 && full.blowup == restart.blowup) ? CheckStatus::PASS
                                                                 : CheckStatus::FAIL;
  if (rep.status == CheckStatus::FAIL) {
    Counterexample ce;
    ce.description = "restart at t deviates from the straight-through solve";
    ce.value = max_dev;
    rep.counterexamples.push_back(std::move(ce));
  }
  return rep;
}

VerificationReport check_growth_condition(const FunctionalDrift& H, int dim, double delay,
                                          const GrowthOptions& opts) {
  if (opts.gamma < 0.0 || opts.gamma > 1.0)
    throw RangeError("check_growth_condition: gamma must lie in [0,1]");
  VerificationReport rep;
  rep.check = "growth_condition";
  Rng rng(opts.seed);

  Vec log_r, log_h, maxima;
  Vec hbuf(static_cast<std::size_t>(dim));
  for (double radius : opts.radius_schedule) {
    double worst = 0.0;
    for (int n = 0; n < opts.samples_per_radius; ++n) {
      std::vector<double> flat(static_cast<std::size_t>(opts.segment_samples) * dim);
      double sup = 0.0;
      for (double& v : flat) {
        v = rng.uniform(-1.0, 1.0);
        sup = std::max(sup, std::fabs(v));
      }
      if (sup == 0.0) continue;
      for (double& v : flat) v *= radius / sup;
      Segment seg(delay, dim, std::move(flat));
      hbuf.assign(static_cast<std::size_t>(dim), 0.0);
      if (H) H(0.0, seg, hbuf);
      worst = std::max(worst, norm_inf(hbuf));
    }
    maxima.push_back(worst);
    log_r.push_back(std::log(radius));
    log_h.push_back(std::log(std::max(worst, 1e-300)));
  }

  const double exponent = regression_slope(log_r, log_h);
  rep.tolerances["gamma"] = opts.gamma;
  rep.tolerances["margin"] = opts.margin;
  rep.statistics["exponent"] = exponent;
  rep.series["radius"] = opts.radius_schedule;
  rep.series["max_abs_H"] = maxima;
  rep.status = exponent <= opts.gamma + opts.margin ? CheckStatus::PASS : CheckStatus::WARN;
  if (rep.status == CheckStatus::WARN)
    rep.notes.push_back("sampled growth exponent exceeds gamma; heuristic only, not a proof");
  return rep;
}

void export_trajectory_csv(const SddeRun& run, std::ostream& os) {
  CsvWriter csv(os);
  std::vector<std::string> cols{"time"};
  for (int c = 0; c < run.trajectory.dim(); ++c) cols.push_back("x" + std::to_string(c + 1));
  csv.header(cols);
  std::vector<double> row(static_cast<std::size_t>(run.trajectory.dim()) + 1);
  for (std::int64_t i = 0; i <= run.trajectory.grid().n_steps; ++i) {
    row[0] = run.trajectory.grid().time(i);
    for (int c = 0; c < run.trajectory.dim(); ++c)
      row[static_cast<std::size_t>(c) + 1] = run.trajectory.value(i, c);
    csv.row(row);
  }
}

std::string run_metadata_json(const SddeRun& run, std::uint64_t seed, double dt,
                              const std::map<std::string, double>& annotations) {
  nlohmann::json j;
  j["seed"] = seed;
  j["dt"] = dt;
  j["solver_id"] = to_string(run.solver_id);
  j["blowup"] = run.blowup;
  j["start"] = run.start;
  j["end"] = run.end_time();
  for (const auto& [k, v] : annotations) j[k] = v;
  return detail::dump_canonical(j);
}

}  // namespace sdde
