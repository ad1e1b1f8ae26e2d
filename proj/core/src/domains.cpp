#include "sdde/domains.hpp"

#include <algorithm>
#include <cmath>

#include "sdde/errors.hpp"
#include "sdde/parallel.hpp"

namespace sdde {

namespace {

Vec unit(Vec v) {
  const double n = norm2(v);
  if (n == 0.0) throw ShapeError("DomainSpec: zero normal row");
  for (double& x : v) x /= n;
  return v;
}

}  // namespace

DomainSpec DomainSpec::orthant(int dim) {
  DomainSpec d;
  d.kind_ = Kind::ORTHANT;
  d.dim_ = dim;
  d.interior_.assign(static_cast<std::size_t>(dim), 1.0);
  return d;
}

DomainSpec DomainSpec::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.empty()) throw ShapeError("DomainSpec::box: bad bounds");
  DomainSpec d;
  d.kind_ = Kind::BOX;
  d.dim_ = static_cast<int>(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw ShapeError("DomainSpec::box: lo must be < hi per coordinate");
  d.interior_.resize(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) d.interior_[i] = 0.5 * (lo[i] + hi[i]);
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

DomainSpec DomainSpec::polyhedron(std::vector<Vec> rows, Vec offsets) {
  if (rows.empty() || rows.size() != offsets.size())
    throw ShapeError("DomainSpec::polyhedron: rows/offsets mismatch");
  DomainSpec d;
  d.kind_ = Kind::POLYHEDRON;
  d.dim_ = static_cast<int>(rows[0].size());
  for (const Vec& r : rows) {
    if (static_cast<int>(r.size()) != d.dim_) throw ShapeError("DomainSpec::polyhedron: ragged rows");
    if (norm2(r) == 0.0) throw ShapeError("DomainSpec::polyhedron: zero row");
  }
  d.rows_ = std::move(rows);
  d.offsets_ = std::move(offsets);

  // interior point by subgradient descent on the worst normalized slack
  Vec x(static_cast<std::size_t>(d.dim_), 0.0);
  double step = 1.0;
  for (int it = 0; it < 20000; ++it) {
    int worst = 0;
    double worst_v = -1e300;
    for (std::size_t q = 0; q < d.rows_.size(); ++q) {
      const double v = (dot(d.rows_[q], x) - d.offsets_[q]) / norm2(d.rows_[q]);
      if (v > worst_v) {
        worst_v = v;
        worst = static_cast<int>(q);
      }
    }
    if (worst_v < -1e-6) break;
    const Vec g = unit(d.rows_[static_cast<std::size_t>(worst)]);
    for (int i = 0; i < d.dim_; ++i) x[static_cast<std::size_t>(i)] -= step * g[static_cast<std::size_t>(i)];
    step = std::max(step * 0.999, 1e-4);
  }
  {
    double worst_v = -1e300;
    for (std::size_t q = 0; q < d.rows_.size(); ++q)
      worst_v = std::max(worst_v, (dot(d.rows_[q], x) - d.offsets_[q]) / norm2(d.rows_[q]));
    if (worst_v >= 0.0)
      throw ShapeError("DomainSpec::polyhedron: could not find an interior point (empty interior?)");
  }
  d.interior_ = x;

  // sampling box: probe extents from the interior point along each axis
  d.bb_lo_.resize(static_cast<std::size_t>(d.dim_));
  d.bb_hi_.resize(static_cast<std::size_t>(d.dim_));
  const double cap = 50.0 * (1.0 + norm_inf(x));
  for (int i = 0; i < d.dim_; ++i) {
    double t_plus = cap, t_minus = cap;
    for (std::size_t q = 0; q < d.rows_.size(); ++q) {
      const double slack = d.offsets_[q] - dot(d.rows_[q], x);
      const double a = d.rows_[q][static_cast<std::size_t>(i)];
      if (a > 0) t_plus = std::min(t_plus, slack / a);
      if (a < 0) t_minus = std::min(t_minus, slack / (-a));
    }
    // inflate: axis probing underestimates off-axis extents
    d.bb_lo_[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - 3.0 * t_minus;
    d.bb_hi_[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + 3.0 * t_plus;
  }
  return d;
}

DomainSpec DomainSpec::ball(Vec center, double radius) {
  if (!(radius > 0.0)) throw ShapeError("DomainSpec::ball: radius must be > 0");
  DomainSpec d;
  d.kind_ = Kind::BALL;
  d.dim_ = static_cast<int>(center.size());
  d.interior_ = center;
  d.center_ = std::move(center);
  d.radius_ = radius;
  return d;
}

double DomainSpec::signed_distance(const Vec& x) const {
  switch (kind_) {
    case Kind::ORTHANT: {
      double out2 = 0.0, inner = 1e300;
      for (double v : x) {
        if (v < 0.0) out2 += v * v;
        inner = std::min(inner, v);
      }
      return out2 > 0.0 ? std::sqrt(out2) : -inner;
    }
    case Kind::BOX: {
      double out2 = 0.0, inner = 1e300;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double below = lo_[i] - x[i], above = x[i] - hi_[i];
        if (below > 0) out2 += below * below;
        if (above > 0) out2 += above * above;
        inner = std::min(inner, std::min(x[i] - lo_[i], hi_[i] - x[i]));
      }
      return out2 > 0.0 ? std::sqrt(out2) : -inner;
    }
    case Kind::POLYHEDRON: {
      double worst = -1e300;
      for (std::size_t q = 0; q < rows_.size(); ++q)
        worst = std::max(worst, (dot(rows_[q], x) - offsets_[q]) / norm2(rows_[q]));
      return worst;
    }
    case Kind::BALL: {
      Vec diff(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - center_[i];
      return norm2(diff) - radius_;
    }
  }
  return 0.0;
}

std::vector<Vec> DomainSpec::normals_at(const Vec& x, double tol) const {
  std::vector<Vec> out;
  switch (kind_) {
    case Kind::ORTHANT:
      for (std::size_t i = 0; i < x.size(); ++i)
        if (std::fabs(x[i]) <= tol) {
          Vec n(x.size(), 0.0);
          n[i] = -1.0;
          out.push_back(std::move(n));
        }
      break;
    case Kind::BOX:
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::fabs(x[i] - lo_[i]) <= tol) {
          Vec n(x.size(), 0.0);
          n[i] = -1.0;
          out.push_back(std::move(n));
        }
        if (std::fabs(x[i] - hi_[i]) <= tol) {
          Vec n(x.size(), 0.0);
          n[i] = 1.0;
          out.push_back(std::move(n));
        }
      }
      break;
    case Kind::POLYHEDRON:
      for (std::size_t q = 0; q < rows_.size(); ++q)
        if (std::fabs(dot(rows_[q], x) - offsets_[q]) <= tol * norm2(rows_[q]))
          out.push_back(unit(rows_[q]));
      break;
    case Kind::BALL: {
      Vec diff(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - center_[i];
      const double n = norm2(diff);
      if (std::fabs(n - radius_) <= tol && n > 0) {
        for (double& v : diff) v /= n;
        out.push_back(std::move(diff));
      }
      break;
    }
  }
  return out;
}

int DomainSpec::facet_count() const {
  switch (kind_) {
    case Kind::ORTHANT: return dim_;
    case Kind::BOX: return 2 * dim_;
    case Kind::POLYHEDRON: return static_cast<int>(rows_.size());
    case Kind::BALL: return 1;
  }
  return 0;
}

Vec DomainSpec::sample_point(Rng& rng) const {
  switch (kind_) {
    case Kind::ORTHANT: {
      Vec x(static_cast<std::size_t>(dim_));
      for (double& v : x) v = rng.exponential(sample_scale_);
      return x;
    }
    case Kind::BOX: {
      Vec x(static_cast<std::size_t>(dim_));
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo_[i], hi_[i]);
      return x;
    }
    case Kind::POLYHEDRON: {
      for (int tries = 0; tries < 100000; ++tries) {
        Vec x(static_cast<std::size_t>(dim_));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(bb_lo_[i], bb_hi_[i]);
        if (contains(x)) return x;
      }
      throw NumericError("DomainSpec: polyhedron rejection sampling failed (domain too thin?)");
    }
    case Kind::BALL: {
      Vec dir(static_cast<std::size_t>(dim_));
      for (double& v : dir) v = rng.gauss();
      const double n = norm2(dir);
      const double r = radius_ * std::pow(rng.uniform(), 1.0 / dim_);
      Vec x(static_cast<std::size_t>(dim_));
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = center_[i] + (n > 0 ? r * dir[i] / n : 0.0);
      return x;
    }
  }
  throw ShapeError("DomainSpec: unknown kind");
}

Vec DomainSpec::sample_boundary(Rng& rng, int facet) const {
  switch (kind_) {
    case Kind::ORTHANT: {
      const int i = facet >= 0 ? facet : rng.uniform_int(dim_);
      Vec x = sample_point(rng);
      x[static_cast<std::size_t>(i)] = 0.0;
      return x;
    }
    case Kind::BOX: {
      const int f = facet >= 0 ? facet : rng.uniform_int(2 * dim_);
      const int i = f / 2;
      Vec x = sample_point(rng);
      x[static_cast<std::size_t>(i)] = (f % 2 == 0) ? lo_[static_cast<std::size_t>(i)]
                                                    : hi_[static_cast<std::size_t>(i)];
      return x;
    }
    case Kind::POLYHEDRON: {
      const int q = facet >= 0 ? facet : rng.uniform_int(static_cast<int>(rows_.size()));
      const Vec& a = rows_[static_cast<std::size_t>(q)];
      for (int tries = 0; tries < 5000; ++tries) {
        // shoot a ray from a random interior base point toward the facet
        Vec base = interior_;
        if (tries % 2 == 1) {
          // mix in interior samples for coverage of the facet
          Vec p = sample_point(rng);
          for (std::size_t i = 0; i < base.size(); ++i) base[i] = 0.5 * (base[i] + p[i]);
        }
        Vec dir(static_cast<std::size_t>(dim_));
        for (double& v : dir) v = rng.gauss();
        if (dot(a, dir) <= 0) for (double& v : dir) v = -v;
        if (dot(a, dir) <= 0) continue;
        double t_hit = 1e300;
        int hit_q = -1;
        for (std::size_t p = 0; p < rows_.size(); ++p) {
          const double denom = dot(rows_[p], dir);
          if (denom <= 0) continue;
          const double t = (offsets_[p] - dot(rows_[p], base)) / denom;
          if (t >= 0 && t < t_hit) {
            t_hit = t;
            hit_q = static_cast<int>(p);
          }
        }
        if (hit_q != q || t_hit >= 1e300) continue;
        Vec x(static_cast<std::size_t>(dim_));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = base[i] + t_hit * dir[i];
        return x;
      }
      throw NumericError("DomainSpec: could not sample facet " + std::to_string(q));
    }
    case Kind::BALL: {
      Vec dir(static_cast<std::size_t>(dim_));
      for (double& v : dir) v = rng.gauss();
      const double n = norm2(dir);
      Vec x(static_cast<std::size_t>(dim_));
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = center_[i] + (n > 0 ? radius_ * dir[i] / n : radius_ * (i == 0));
      return x;
    }
  }
  throw ShapeError("DomainSpec: unknown kind");
}

Segment DomainSpec::sample_segment(Rng& rng, double delay, int n_samples) const {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n_samples) * dim_);
  for (int k = 0; k < n_samples; ++k) {
    Vec p = sample_point(rng);
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return Segment(delay, dim_, std::move(flat));
}

double nagumo_limit_estimate(const FunctionalDrift& H, const Segment& eta, double t,
                             const DomainSpec& dom, const Vec& h_schedule) {
  Vec hval(static_cast<std::size_t>(eta.dim()), 0.0);
  if (H) H(t, eta, hval);
  const Vec x0 = eta.endpoint();

  Vec est;
  for (double h : h_schedule) {
    Vec y(x0.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x0[i] + h * hval[i];
    est.push_back(std::max(dom.signed_distance(y), 0.0) / h);
  }
  if (est.size() == 1) return est[0];
  // linear Richardson extrapolation e(h) ~ e0 + c*h from the two smallest h
  const std::size_t n = est.size();
  const double h1 = h_schedule[n - 2], h2 = h_schedule[n - 1];
  const double e0 = (h1 * est[n - 1] - h2 * est[n - 2]) / (h1 - h2);
  return std::max(e0, 0.0);
}

namespace {

// Segment in C_D whose endpoint is overwritten with a given point of D.
Segment boundary_segment(const DomainSpec& dom, Rng& rng, double delay, int n_samples,
                         const Vec& endpoint) {
  Segment seg = dom.sample_segment(rng, delay, n_samples);
  std::vector<double> flat(seg.data(), seg.data() + static_cast<std::size_t>(seg.sample_count()) * seg.dim());
  std::copy(endpoint.begin(), endpoint.end(),
            flat.end() - static_cast<std::ptrdiff_t>(endpoint.size()));
  return Segment(delay, seg.dim(), std::move(flat));
}

}  // namespace

VerificationReport check_nagumo(const FunctionalDrift& H, int dim, double delay,
                                const DomainSpec& dom, const NagumoOptions& opts) {
  VerificationReport rep;
  rep.check = "nagumo";
  rep.tolerances["tol_nagumo"] = opts.tol;
  Rng rng(opts.seed);
  Vec hval(static_cast<std::size_t>(dim));

  double worst = 0.0;
  if (dom.kind() == DomainSpec::Kind::ORTHANT) {
    // exact sign test per facet: eta >= 0, eta^i(0) = 0 requires H^i >= 0
    for (int facet = 0; facet < dim; ++facet) {
      for (int n = 0; n < opts.n_samples; ++n) {
        Vec p = dom.sample_boundary(rng, facet);
        Segment eta = boundary_segment(dom, rng, delay, opts.segment_samples, p);
        hval.assign(static_cast<std::size_t>(dim), 0.0);
        if (H) H(opts.t_eval, eta, hval);
        const double margin = -hval[static_cast<std::size_t>(facet)];
        worst = std::max(worst, margin);
        if (margin > opts.tol) {
          Counterexample ce;
          ce.description = "H^i < 0 on the facet x_i = 0 (i = " + std::to_string(facet + 1) + ")";
          ce.inputs["eta_endpoint"] = p;
          ce.inputs["H"] = hval;
          ce.value = margin;
          if (rep.counterexamples.size() < 8) rep.counterexamples.push_back(std::move(ce));
          rep.status = CheckStatus::FAIL;
        }
      }
    }
    rep.statistics["worst_estimate"] = worst;
    rep.statistics["mode"] = 0.0;  // sign test
    return rep;
  }

  const int facets = dom.facet_count();
  for (int facet = 0; facet < facets; ++facet) {
    for (int n = 0; n < opts.n_samples; ++n) {
      Vec p = dom.sample_boundary(rng, facet);
      Segment eta = boundary_segment(dom, rng, delay, opts.segment_samples, p);
      const double est = nagumo_limit_estimate(H, eta, opts.t_eval, dom, opts.h_schedule);
      worst = std::max(worst, est);
      if (est > opts.tol) {
        Counterexample ce;
        ce.description = "h-limit of dist(eta(0) + h H, D)/h stays positive";
        ce.inputs["eta_endpoint"] = p;
        ce.value = est;
        if (rep.counterexamples.size() < 8) rep.counterexamples.push_back(std::move(ce));
        rep.status = CheckStatus::FAIL;
      }
    }
  }
  rep.statistics["worst_estimate"] = worst;
  rep.statistics["mode"] = 1.0;  // h-limit
  return rep;
}

VerificationReport check_polyhedral_facets(const FunctionalDrift& H, int dim, double delay,
                                           const DomainSpec& dom, const NagumoOptions& opts) {
  if (dom.kind() != DomainSpec::Kind::POLYHEDRON)
    throw UnsupportedError("check_polyhedral_facets: domain is not a polyhedron");
  VerificationReport rep;
  rep.check = "polyhedral_facets";
  rep.tolerances["facet_tol"] = opts.tol;
  Rng rng(opts.seed);
  Vec hval(static_cast<std::size_t>(dim));

  double worst = -1e300;
  for (int q = 0; q < dom.facet_count(); ++q) {
    const Vec& a = dom.rows()[static_cast<std::size_t>(q)];
    for (int n = 0; n < opts.n_samples; ++n) {
      Vec p = dom.sample_boundary(rng, q);
      Segment eta = boundary_segment(dom, rng, delay, opts.segment_samples, p);
      hval.assign(static_cast<std::size_t>(dim), 0.0);
      if (H) H(opts.t_eval, eta, hval);
      const double v = dot(a, hval);
      worst = std::max(worst, v);
      if (v > opts.tol) {
        Counterexample ce;
        ce.description = "facet derivative <a_q, H> > 0 on facet q = " + std::to_string(q + 1);
        ce.inputs["eta_endpoint"] = p;
        ce.inputs["H"] = hval;
        ce.value = v;
        if (rep.counterexamples.size() < 8) rep.counterexamples.push_back(std::move(ce));
        rep.status = CheckStatus::FAIL;
      }
    }
  }
  rep.statistics["worst_facet_derivative"] = worst;
  return rep;
}

VerificationReport check_diffusion_tangency(const DriftSpec& drift, const DiffusionSpec& diff,
                                            const DomainSpec& dom, const TangencyOptions& opts) {
  VerificationReport rep;
  rep.check = "diffusion_tangency";
  rep.tolerances["tol"] = opts.tol;
  Rng rng(opts.seed);

  const DriftSpec strat = effective_stratonovich_drift(drift, diff);
  Vec bval;

  double worst_drift = -1e300, worst_noise = 0.0;
  const int facets = dom.facet_count();
  for (int facet = 0; facet < facets; ++facet) {
    for (int n = 0; n < opts.n_boundary; ++n) {
      BoundaryProbe probe;
      probe.point = dom.sample_boundary(rng, facet);
      probe.normals = dom.normals_at(probe.point, boundary_tol(probe.point));
      strat.eval(opts.t_eval, probe.point, bval);
      for (const Vec& nu : probe.normals) {
        const double bn = dot(bval, nu);
        const double drift_excess = opts.two_sided ? std::fabs(bn) : bn;
        worst_drift = std::max(worst_drift, drift_excess);
        bool bad = drift_excess > opts.tol;
        double noise_excess = 0.0;
        for (int j = 0; j < diff.drivers; ++j) {
          double mn = 0.0;
          for (int i = 0; i < dom.dim(); ++i)
            mn += diff.eval(i, j, probe.point) * nu[static_cast<std::size_t>(i)];
          noise_excess = std::max(noise_excess, std::fabs(mn));
        }
        worst_noise = std::max(worst_noise, noise_excess);
        bad = bad || noise_excess > opts.tol;
        if (bad) {
          Counterexample ce;
          ce.description = "boundary probe with outward drift or non-tangent noise";
          ce.inputs["point"] = probe.point;
          ce.inputs["normal"] = nu;
          ce.value = std::max(drift_excess, noise_excess);
          if (rep.counterexamples.size() < 8) rep.counterexamples.push_back(std::move(ce));
          rep.status = CheckStatus::FAIL;
        }
      }
    }
  }
  rep.statistics["worst_drift_normal_component"] = worst_drift;
  rep.statistics["worst_noise_normal_component"] = worst_noise;
  return rep;
}

FunctionalDrift perturb_inward(const FunctionalDrift& H, const DomainSpec& dom, const Vec& e,
                               double eps) {
  if (!(eps >= 0.0)) throw ShapeError("perturb_inward: eps must be >= 0");
  if (dom.signed_distance(e) >= 0.0)
    throw ShapeError("perturb_inward: e must be strictly interior");
  return [H, e, eps](double t, const Segment& eta, Vec& out) {
    out.assign(static_cast<std::size_t>(eta.dim()), 0.0);
    if (H) H(t, eta, out);
    if (eps == 0.0) return;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] -= eps * (eta.endpoint(static_cast<int>(i)) - e[i]);
  };
}

VerificationReport verify_invariance_mc(const SystemSpec& sys, const DomainSpec& dom,
                                        const InvarianceOptions& opts) {
  VerificationReport rep;
  rep.check = "invariance_mc";
  if (opts.dt_schedule.empty()) throw ShapeError("verify_invariance_mc: empty dt schedule");
  const double dt_min = *std::min_element(opts.dt_schedule.begin(), opts.dt_schedule.end());
  const double viol_tol = opts.viol_tol_coeff * std::pow(dt_min, opts.viol_tol_order);
  rep.tolerances["viol_tol_at_finest_dt"] = viol_tol;
  rep.tolerances["viol_tol_coeff"] = opts.viol_tol_coeff;
  rep.tolerances["viol_tol_order"] = opts.viol_tol_order;
  rep.tolerances["viol_floor"] = opts.viol_floor;
  rep.tolerances["ratio_min"] = opts.ratio_min;

  // initial segments in C_D, shared across the dt schedule
  std::vector<Segment> initials;
  for (int i = 0; i < opts.n_initials; ++i) {
    Rng rng(detail::mix4(opts.seed, static_cast<std::uint64_t>(i), 0x696e6974ULL, 0));
    initials.push_back(dom.sample_segment(rng, sys.delay, opts.segment_samples));
  }

  const int workers = opts.workers > 0 ? opts.workers : default_workers();
  Vec max_viol_per_dt;
  std::int64_t blowups = 0;

  for (double dt : opts.dt_schedule) {
    const std::int64_t runs = static_cast<std::int64_t>(opts.n_paths) * opts.n_initials;
    Vec viols(static_cast<std::size_t>(runs), 0.0);
    std::vector<char> blown(static_cast<std::size_t>(runs), 0);
    parallel_for(runs, workers, [&](std::int64_t idx) {
      const int p = static_cast<int>(idx / opts.n_initials);
      const int i = static_cast<int>(idx % opts.n_initials);
      const std::uint64_t path_seed = detail::mix4(opts.seed, static_cast<std::uint64_t>(p), 0x70617468ULL, 1);
      BrownianPath path = BrownianPath::sample_window(path_seed, 0.0, opts.T, dt_min,
                                                      std::max(sys.diffusion.drivers, 1));
      SddeRun run = solve_direct(sys, path, 0.0, initials[static_cast<std::size_t>(i)], opts.T, dt);
      double worst = 0.0;
      for (std::int64_t node = 0; node <= run.trajectory.grid().n_steps; ++node)
        worst = std::max(worst, dom.signed_distance(run.trajectory.node_value(node)));
      viols[static_cast<std::size_t>(idx)] = std::max(worst, 0.0);
      blown[static_cast<std::size_t>(idx)] = run.blowup ? 1 : 0;
    });
    double worst = 0.0;
    for (double v : viols) worst = std::max(worst, v);
    for (char b : blown) blowups += b;
    max_viol_per_dt.push_back(worst);
  }

  rep.series["dt"] = opts.dt_schedule;
  rep.series["max_violation"] = max_viol_per_dt;
  rep.statistics["blowups"] = static_cast<double>(blowups);

  if (blowups > 0) {
    rep.status = CheckStatus::FAIL;
    rep.notes.push_back("blow-up inside the domain run counts as failure");
    return rep;
  }

  bool all_zero = true;
  for (double v : max_viol_per_dt)
    if (v > opts.viol_floor) all_zero = false;
  if (all_zero) {
    rep.statistics["mean_ratio"] = 0.0;
    rep.notes.push_back("all violations below the floor; trivially invariant at this resolution");
    return rep;  // PASS
  }

  // geometric mean of halving ratios
  double log_sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k + 1 < max_viol_per_dt.size(); ++k) {
    const double a = std::max(max_viol_per_dt[k], opts.viol_floor);
    const double b = std::max(max_viol_per_dt[k + 1], opts.viol_floor);
    log_sum += std::log(a / b);
    ++count;
  }
  const double mean_ratio = count > 0 ? std::exp(log_sum / count) : 1e300;
  rep.statistics["mean_ratio"] = mean_ratio;
  rep.statistics["final_violation"] = max_viol_per_dt.back();

  if (max_viol_per_dt.back() > viol_tol || mean_ratio < opts.ratio_min) {
    rep.status = CheckStatus::FAIL;
    Counterexample ce;
    ce.description = "violations do not vanish under dt-halving";
    ce.inputs["max_violation_per_dt"] = max_viol_per_dt;
    ce.value = max_viol_per_dt.back();
    rep.counterexamples.push_back(std::move(ce));
  }
  return rep;
}

VerificationReport cross_check_invariance(const VerificationReport& mc,
                                          const VerificationReport& tangency,
                                          const VerificationReport& nagumo, double margin) {
  VerificationReport rep;
  rep.check = "invariance_cross_check";
  rep.tolerances["margin"] = margin;
  const auto it = nagumo.statistics.find("worst_estimate");
  const double worst = it != nagumo.statistics.end() ? it->second : 0.0;
  rep.statistics["nagumo_worst_estimate"] = worst;
  if (mc.status == CheckStatus::PASS && tangency.status == CheckStatus::PASS &&
      nagumo.status == CheckStatus::FAIL && worst > margin) {
    rep.status = CheckStatus::FAIL;
    rep.notes.push_back(
        "inconsistent: Monte Carlo invariance and tangency pass but the drift fails the "
        "boundary condition by more than the discretization tolerance");
  }
  return rep;
}

}  // namespace sdde
