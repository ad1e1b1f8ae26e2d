#include "sdde/order.hpp"

#include <algorithm>
#include <cmath>

#include "sdde/errors.hpp"

namespace sdde {

std::pair<double, std::optional<std::int64_t>> run_order_violation(const SddeRun& a,
                                                                   const SddeRun& b) {
  const std::int64_t n = std::min(a.trajectory.grid().n_steps, b.trajectory.grid().n_steps);
  double worst = 0.0;
  std::optional<std::int64_t> first;
  for (std::int64_t node = 0; node <= n; ++node) {
    for (int c = 0; c < a.trajectory.dim(); ++c) {
      const double gap = a.trajectory.value(node, c) - b.trajectory.value(node, c);
      if (gap > 0.0) {
        if (!first) first = node;
        worst = std::max(worst, gap);
      }
    }
  }
  return {worst, first};
}

std::pair<Segment, Segment> sample_ordered_segments(const DomainSpec& dom, Rng& rng, double delay,
                                                    int n_samples) {
  using Kind = DomainSpec::Kind;
  const int d = dom.dim();
  for (int tries = 0; tries < 1000; ++tries) {
    Segment upper = dom.sample_segment(rng, delay, n_samples);
    std::vector<double> lo_flat(static_cast<std::size_t>(n_samples) * d);
    bool ok = true;
    for (int k = 0; k < n_samples && ok; ++k) {
      Vec point(static_cast<std::size_t>(d));
      switch (dom.kind()) {
        case Kind::ORTHANT:
          for (int c = 0; c < d; ++c) point[static_cast<std::size_t>(c)] = rng.uniform() * upper.sample(k, c);
          break;
        case Kind::BOX:
          for (int c = 0; c < d; ++c) {
            const double lo = dom.lo()[static_cast<std::size_t>(c)];
            point[static_cast<std::size_t>(c)] = lo + rng.uniform() * (upper.sample(k, c) - lo);
          }
          break;
        case Kind::POLYHEDRON: {
          if (dom.contains(Vec(static_cast<std::size_t>(d), 0.0))) {
            // shrink toward 0; staying in D needs a check for general rows
            for (int c = 0; c < d; ++c)
              point[static_cast<std::size_t>(c)] = rng.uniform() * upper.sample(k, c);
          } else {
            for (int c = 0; c < d; ++c)
              point[static_cast<std::size_t>(c)] =
                  upper.sample(k, c) - rng.uniform() * 0.2 * (1.0 + std::fabs(upper.sample(k, c)));
          }
          if (!dom.contains(point, 1e-12)) ok = false;
          break;
        }
        case Kind::BALL:
          for (int c = 0; c < d; ++c)
            point[static_cast<std::size_t>(c)] =
                upper.sample(k, c) - rng.uniform() * 0.2 * dom.sample_scale();
          if (!dom.contains(point, 1e-12)) ok = false;
          break;
      }
      if (ok)
        std::copy(point.begin(), point.end(),
                  lo_flat.begin() + static_cast<std::ptrdiff_t>(k) * d);
    }
    if (!ok) continue;
    return {Segment(delay, d, std::move(lo_flat)), std::move(upper)};
  }
  throw NumericError("sample_ordered_segments: rejection sampling failed for this domain");
}

VerificationReport check_quasimonotone(const FunctionalDrift& G, int dim, double delay,
                                       const DomainSpec& dom, const QuasimonotoneOptions& opts) {
  VerificationReport rep;
  rep.check = "quasimonotone";
  rep.tolerances["tol"] = opts.tol;
  Rng rng(opts.seed);

  Vec g_up(static_cast<std::size_t>(dim)), g_lo(static_cast<std::size_t>(dim));
  double worst = -1e300;
  int tested = 0;
  for (int n = 0; n < opts.n_pairs; ++n) {
    auto [lower, upper] = sample_ordered_segments(dom, rng, delay, opts.segment_samples);
    const int i = rng.uniform_int(dim);

    // condition on equal i-th endpoint values; half the pairs additionally
    // collapse toward near-equality where the definition bites
    std::vector<double> lo_flat(lower.data(),
                                lower.data() + static_cast<std::size_t>(lower.sample_count()) * dim);
    if (rng.uniform() < opts.boundary_fraction) {
      for (int k = 0; k < lower.sample_count(); ++k)
        for (int c = 0; c < dim; ++c) {
          const double u = upper.sample(k, c);
          const double l = lo_flat[static_cast<std::size_t>(k) * dim + c];
          lo_flat[static_cast<std::size_t>(k) * dim + c] = u - 0.05 * (u - l);
        }
    }
    lo_flat[static_cast<std::size_t>(lower.sample_count() - 1) * dim + i] = upper.endpoint(i);
    Vec lo_end(lo_flat.end() - dim, lo_flat.end());
    if (!dom.contains(lo_end, 1e-9)) continue;  // endpoint overwrite left D; skip
    Segment lower2(delay, dim, std::move(lo_flat));

    g_up.assign(static_cast<std::size_t>(dim), 0.0);
    g_lo.assign(static_cast<std::size_t>(dim), 0.0);
    if (G) {
      G(opts.t_eval, upper, g_up);
      G(opts.t_eval, lower2, g_lo);
    }
    const double margin = g_lo[static_cast<std::size_t>(i)] - g_up[static_cast<std::size_t>(i)];
    worst = std::max(worst, margin);
    ++tested;
    if (margin > opts.tol) {
      Counterexample ce;
      ce.description = "G^i decreases along an increase of the history (i = " +
                       std::to_string(i + 1) + ")";
      ce.inputs["upper_endpoint"] = upper.endpoint();
      ce.inputs["lower_endpoint"] = lower2.endpoint();
      ce.inputs["G_upper"] = g_up;
      ce.inputs["G_lower"] = g_lo;
      ce.value = margin;
      if (rep.counterexamples.size() < 8) rep.counterexamples.push_back(std::move(ce));
      rep.status = CheckStatus::FAIL;
    }
  }
  rep.statistics["worst_margin"] = worst;
  rep.statistics["pairs_tested"] = static_cast<double>(tested);
  return rep;
}

namespace {

void require_shared_structure(const SystemSpec& a, const SystemSpec& b, const CompareOptions& opts,
                              std::vector<std::string>& warnings) {
  if (!a.diffusion.diagonal || !b.diffusion.diagonal)
    throw UnsupportedError("compare_systems: comparison requires diagonal diffusion");
  if (a.dim != b.dim || a.diffusion.drivers != b.diffusion.drivers)
    throw ShapeError("compare_systems: systems are not conformal");
  Rng rng(opts.seed ^ 0x5c5c5c5cULL);
  Vec ba(static_cast<std::size_t>(a.dim)), bb(static_cast<std::size_t>(a.dim));
  for (int n = 0; n < opts.structural_samples; ++n) {
    Vec x(static_cast<std::size_t>(a.dim));
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    for (int i = 0; i < a.dim; ++i)
      for (int j = 0; j < a.diffusion.drivers; ++j)
        if (std::fabs(a.diffusion.eval(i, j, x) - b.diffusion.eval(i, j, x)) > 1e-12)
          throw UnsupportedError("compare_systems: the two systems must share their diffusion");
    a.drift.eval(0.0, x, ba);
    b.drift.eval(0.0, x, bb);
    for (int i = 0; i < a.dim; ++i)
      if (std::fabs(ba[static_cast<std::size_t>(i)] - bb[static_cast<std::size_t>(i)]) > 1e-12) {
        warnings.push_back("instantaneous drifts differ at a sampled point; the comparison "
                           "hypothesis assumes a shared b");
        return;
      }
  }
}

}  // namespace

OrderedPair compare_systems(const SystemSpec& sysG, const SystemSpec& sysGbar, const Segment& eta,
                            const Segment& eta_star, const BrownianPath& path, double T, double dt,
                            const CompareOptions& opts) {
  OrderedPair pair;
  require_shared_structure(sysG, sysGbar, opts, pair.warnings);

  const OrderFlag flag = compare_segments(eta, eta_star);
  if (flag == OrderFlag::INCOMPARABLE)
    throw ShapeError("compare_systems: initial segments are not ordered (eta <= eta_star required)");

  // sampled dominance pre-check G <= Gbar on C_D
  if (opts.domain != nullptr && opts.dominance_samples > 0) {
    Rng rng(opts.seed ^ 0xd0d0d0d0ULL);
    Vec g(static_cast<std::size_t>(sysG.dim)), gbar(static_cast<std::size_t>(sysG.dim));
    double worst = -1e300;
    for (int n = 0; n < opts.dominance_samples; ++n) {
      Segment xi = opts.domain->sample_segment(rng, sysG.delay, opts.segment_samples);
      sysG.eval_H(0.0, xi, g);
      sysGbar.eval_H(0.0, xi, gbar);
      for (int i = 0; i < sysG.dim; ++i)
        worst = std::max(worst, g[static_cast<std::size_t>(i)] - gbar[static_cast<std::size_t>(i)]);
    }
    if (worst > 1e-9) {
      if (opts.dominance_gate)
        throw UnsupportedError("compare_systems: sampled drift dominance G <= Gbar violated by " +
                               std::to_string(worst));
      pair.warnings.push_back("sampled drift dominance G <= Gbar violated by " +
                              std::to_string(worst));
    }
  }

  pair.lower = solve_direct(sysG, path, 0.0, eta, T, dt);
  pair.upper = solve_direct(sysGbar, path, 0.0, eta_star, T, dt);
  auto [viol, first] = run_order_violation(pair.lower, pair.upper);
  pair.violation = viol;
  pair.first_violation_node = first;
  return pair;
}

void LotkaVolterraParams::validate() const {
  const int d = dim();
  if (d == 0 || beta.size() != alpha.size() || R.size() != alpha.size() ||
      sigma.size() != alpha.size() || c.size() != static_cast<std::size_t>(d) * d)
    throw ShapeError("LotkaVolterraParams: inconsistent sizes");
  if (!(delay > 0)) throw ShapeError("LotkaVolterraParams: delay must be > 0");
  for (int i = 0; i < d; ++i) {
    if (!(alpha[static_cast<std::size_t>(i)] >= 0) || !(beta[static_cast<std::size_t>(i)] > 0))
      throw ShapeError("LotkaVolterraParams: need alpha >= 0, beta > 0");
    if (R[static_cast<std::size_t>(i)] < 1.0 / beta[static_cast<std::size_t>(i)] - 1e-12)
      throw ShapeError("LotkaVolterraParams: box invariance needs R_i >= 1/beta_i");
  }
  for (double v : c)
    if (v < 0) throw ShapeError("LotkaVolterraParams: c_ij must be >= 0");
  if (mu.size() != 1 && mu.size() != static_cast<std::size_t>(d) * d)
    throw ShapeError("LotkaVolterraParams: mu must be shared or d x d");
  for (const DelayMeasure& m : mu) m.validate(delay);
}

namespace {

DiffusionSpec lv_diffusion(const LotkaVolterraParams& p) {
  DiffusionSpec diff;
  diff.drivers = p.dim();
  diff.diagonal = true;
  diff.label = "sigma_i x_i (R_i - x_i)";
  diff.coeff = [sigma = p.sigma, R = p.R](int i, int j, const Vec& x) {
    if (i != j) return 0.0;
    return sigma[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] *
           (R[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]);
  };
  diff.coeff_deriv = [sigma = p.sigma, R = p.R](int i, int j, int k, const Vec& x) {
    if (i != j || k != i) return 0.0;
    return sigma[static_cast<std::size_t>(i)] *
           (R[static_cast<std::size_t>(i)] - 2.0 * x[static_cast<std::size_t>(i)]);
  };
  return diff;
}

}  // namespace

SystemSpec make_lv_system(const LotkaVolterraParams& p) {
  p.validate();
  SystemSpec sys;
  sys.dim = p.dim();
  sys.delay = p.delay;
  sys.name = "lv-box";
  sys.diffusion = lv_diffusion(p);
  sys.H = [p](double, const Segment& eta, Vec& out) {
    const int d = p.dim();
    for (int i = 0; i < d; ++i) {
      double interaction = 0.0;
      for (int j = 0; j < d; ++j) {
        const double cij = p.c[static_cast<std::size_t>(i) * d + j];
        if (cij != 0.0) interaction += cij * p.mu_at(i, j).apply(eta, j);
      }
      const double xi = eta.endpoint(i);
      out[static_cast<std::size_t>(i)] =
          p.alpha[static_cast<std::size_t>(i)] * xi *
          (1.0 - p.beta[static_cast<std::size_t>(i)] * xi - interaction);
    }
  };
  return sys;
}

SystemSpec make_lv_lower_envelope(const LotkaVolterraParams& p) {
  p.validate();
  SystemSpec sys;
  sys.dim = p.dim();
  sys.delay = p.delay;
  sys.name = "lv-box-lower";
  sys.diffusion = lv_diffusion(p);
  Vec worst_case(static_cast<std::size_t>(p.dim()), 0.0);
  for (int i = 0; i < p.dim(); ++i)
    for (int j = 0; j < p.dim(); ++j)
      worst_case[static_cast<std::size_t>(i)] +=
          p.c[static_cast<std::size_t>(i) * p.dim() + j] * p.R[static_cast<std::size_t>(j)];
  sys.H = [p, worst_case](double, const Segment& eta, Vec& out) {
    for (int i = 0; i < p.dim(); ++i) {
      const double xi = eta.endpoint(i);
      out[static_cast<std::size_t>(i)] =
          p.alpha[static_cast<std::size_t>(i)] * xi *
          (1.0 - p.beta[static_cast<std::size_t>(i)] * xi - worst_case[static_cast<std::size_t>(i)]);
    }
  };
  return sys;
}

SystemSpec make_lv_upper_envelope(const LotkaVolterraParams& p) {
  p.validate();
  SystemSpec sys;
  sys.dim = p.dim();
  sys.delay = p.delay;
  sys.name = "lv-box-upper";
  sys.diffusion = lv_diffusion(p);
  sys.H = [p](double, const Segment& eta, Vec& out) {
    for (int i = 0; i < p.dim(); ++i) {
      const double xi = eta.endpoint(i);
      out[static_cast<std::size_t>(i)] = p.alpha[static_cast<std::size_t>(i)] * xi *
                                         (1.0 - p.beta[static_cast<std::size_t>(i)] * xi);
    }
  };
  return sys;
}

EnvelopeResult lotka_volterra_envelope(const LotkaVolterraParams& p, const Segment& eta,
                                       const BrownianPath& path, double T, double dt) {
  p.validate();
  if (eta.dim() != p.dim()) throw ShapeError("lotka_volterra_envelope: eta dim mismatch");

  Vec mins(static_cast<std::size_t>(p.dim()), 1e300), maxs(static_cast<std::size_t>(p.dim()), -1e300);
  for (int k = 0; k < eta.sample_count(); ++k)
    for (int c = 0; c < p.dim(); ++c) {
      mins[static_cast<std::size_t>(c)] = std::min(mins[static_cast<std::size_t>(c)], eta.sample(k, c));
      maxs[static_cast<std::size_t>(c)] = std::max(maxs[static_cast<std::size_t>(c)], eta.sample(k, c));
    }

  EnvelopeResult res;
  res.mid = solve_direct(make_lv_system(p), path, 0.0, eta, T, dt);
  res.lower = solve_direct(make_lv_lower_envelope(p), path, 0.0,
                           Segment::constant(p.delay, mins, eta.sample_count()), T, dt);
  res.upper = solve_direct(make_lv_upper_envelope(p), path, 0.0,
                           Segment::constant(p.delay, maxs, eta.sample_count()), T, dt);

  auto [vl, fl] = run_order_violation(res.lower, res.mid);
  auto [vu, fu] = run_order_violation(res.mid, res.upper);
  res.violation_lower = vl;
  res.violation_upper = vu;
  res.first_violation_lower = fl;
  res.first_violation_upper = fu;
  return res;
}

}  // namespace sdde
