#include <cmath>
#include <functional>

#include "doctest.h"
#include "sdde/builtins.hpp"
#include "sdde/rds.hpp"

using namespace sdde;

namespace {

// independent fine-step ODE reference for the deterministic circuit
// x1' = g(x_d(t - r)) - a1 x1, xj' = x_{j-1}(t - r) - aj xj
// (point-mass transport at -r, constant history). Returns the trajectory.
std::vector<std::vector<double>> circuit_reference(const Vec& alpha,
                                                   const std::function<double(double)>& g,
                                                   double r, Vec x0, double T, double dt) {
  const auto lag = static_cast<std::size_t>(std::llround(r / dt));
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const std::size_t d = alpha.size();
  std::vector<std::vector<double>> x(d, std::vector<double>(steps + 1));
  for (std::size_t j = 0; j < d; ++j) x[j][0] = x0[j];
  for (std::size_t n = 0; n < steps; ++n) {
    for (std::size_t j = 0; j < d; ++j) {
      const double delayed = n >= lag ? x[j == 0 ? d - 1 : j - 1][n - lag]
                                      : x0[j == 0 ? d - 1 : j - 1];
      const double feed = j == 0 ? g(delayed) : delayed;
      x[j][n + 1] = x[j][n] + dt * (feed - alpha[j] * x[j][n]);
    }
  }
  return x;
}

// worst margin of lambda*v over the circuit trajectory on [t-r, t]
double reference_margin(const std::vector<std::vector<double>>& traj, const Vec& v, double lambda,
                        double r, double t, double dt) {
  const auto lag = static_cast<std::size_t>(std::llround(r / dt));
  const auto at_t = static_cast<std::size_t>(std::llround(t / dt));
  double margin = 1e300;
  for (std::size_t n = at_t - lag; n <= at_t; ++n)
    for (std::size_t j = 0; j < v.size(); ++j)
      margin = std::min(margin, lambda * v[j] - traj[j][n]);
  return margin;
}

}  // namespace

TEST_CASE("cocycle rejects time-dependent systems") {
  SystemSpec sys;
  sys.dim = 1;
  sys.delay = 0.5;
  sys.H = [](double t, const Segment& eta, Vec& o) { o[0] = t * eta.endpoint(0); };
  CHECK_THROWS_AS(Cocycle(sys, 1, 1.0, 1.0, 1e-2), UnsupportedError);
}

TEST_CASE("cocycle: t = 0 is the identity, t >= r is the trajectory tail") {
  BuiltSystem sd = make_builtin("scalar-delay");
  Cocycle c(sd.sys, 11, 0.0, 3.0, 1e-2);
  Segment eta = Segment::constant(1.0, {0.5});

  Segment same = c.apply(0.0, ShiftIndex{0}, eta);
  CHECK(same.sample_count() == eta.sample_count());
  CHECK(same.sample(0, 0) == eta.sample(0, 0));

  // t >= r: pure trajectory tail, matching the raw solve
  const double t = 2.0;
  Segment out = c.apply(t, ShiftIndex{0}, eta);
  SddeRun run = c.run(t, ShiftIndex{0}, eta);
  for (int k = 0; k < out.sample_count(); ++k) {
    const std::int64_t node = run.trajectory.grid().index_of(t - 1.0 + k * out.sample_spacing());
    CHECK(out.sample(k, 0) == run.trajectory.value(node, 0));
  }
}

TEST_CASE("cocycle: t < r mixes trajectory and initial history") {
  BuiltSystem sd = make_builtin("scalar-delay");
  Cocycle c(sd.sys, 13, 0.0, 3.0, 1e-2);
  // non-constant history so the branch matters
  Segment eta(1.0, 1, {0.1, 0.4, -0.2, 0.3, 0.25});
  const double t = 0.5;  // r = 1
  Segment out = c.apply(t, ShiftIndex{0}, eta);
  SddeRun run = c.run(t, ShiftIndex{0}, eta);
  for (int k = 0; k < out.sample_count(); ++k) {
    const double tau = -1.0 + k * out.sample_spacing();
    if (t + tau <= 0.0) {
      CHECK(out.sample(k, 0) == doctest::Approx(eta.eval1(t + tau, 0)).epsilon(1e-12));
    } else {
      const std::int64_t node = run.trajectory.grid().index_of(t + tau);
      CHECK(out.sample(k, 0) == run.trajectory.value(node, 0));
    }
  }
}

TEST_CASE("cocycle property is bitwise exact") {
  for (const char* name : {"scalar-delay", "biochem", "lv-simplex"}) {
    BuiltSystem b = make_builtin(name);
    Cocycle c(b.sys, 17, 0.0, 4.0, 1e-2);
    Rng rng(23);
    std::vector<Segment> etas;
    for (int n = 0; n < 5; ++n) {
      if (b.domain) {
        etas.push_back(b.domain->sample_segment(rng, b.sys.delay, 6));
      } else {
        std::vector<double> flat(6);
        for (double& v : flat) v = rng.uniform(-1.0, 1.0);
        etas.push_back(Segment(b.sys.delay, 1, std::move(flat)));
      }
    }
    VerificationReport rep = check_cocycle_property(c, 1.0, 1.0, etas);
    CHECK(rep.passed());
    CHECK(rep.statistics.at("max_deviation") == 0.0);

    // degenerate cases
    CHECK(check_cocycle_property(c, 1.0, 0.0, {etas[0]}).passed());
    CHECK(check_cocycle_property(c, 0.0, 1.0, {etas[0]}).passed());
  }
}

TEST_CASE("order preservation on the monotone catalog systems") {
  OrderPreservationOptions opts;
  opts.n_pairs = 10;
  opts.segment_samples = 6;
  opts.disc_tol = 0.05 * std::sqrt(1e-2);

  BuiltSystem biochem = make_builtin("biochem");
  Cocycle cb(biochem.sys, 19, 0.0, 2.0, 1e-2);
  DomainSpec box3 = DomainSpec::box({0, 0, 0}, {2, 2, 2});
  CHECK(check_order_preserving(cb, 1.0, box3, opts).passed());

  BuiltSystem cm = make_builtin("coupled-monotone");
  Cocycle cc(cm.sys, 19, 0.0, 2.0, 1e-2);
  DomainSpec box2 = DomainSpec::box({-2, -2}, {2, 2});
  CHECK(check_order_preserving(cc, 1.0, box2, opts).passed());

  BuiltSystem sd = make_builtin("scalar-delay");
  Cocycle cs(sd.sys, 19, 0.0, 2.0, 1e-2);
  DomainSpec box1 = DomainSpec::box({-2}, {2});
  CHECK(check_order_preserving(cs, 1.0, box1, opts).passed());

  // the gate stops non-quasimonotone systems
  BuiltSystem lv = make_builtin("lv-box");
  Cocycle cl(lv.sys, 19, 0.0, 2.0, 1e-2);
  VerificationReport gated = check_order_preserving(cl, 1.0, *lv.domain, opts);
  CHECK(gated.failed());
}

TEST_CASE("order intervals map into the image interval of their endpoints") {
  BuiltSystem biochem = make_builtin("biochem");
  Cocycle c(biochem.sys, 29, 0.0, 2.0, 1e-2);
  DomainSpec box = DomainSpec::box({0, 0, 0}, {2, 2, 2});
  Rng rng(31);
  const double disc = 0.05 * std::sqrt(1e-2);
  for (int n = 0; n < 5; ++n) {
    auto [lo, hi] = sample_ordered_segments(box, rng, biochem.sys.delay, 6);
    // a segment between them
    std::vector<double> mid_flat;
    for (int k = 0; k < lo.sample_count(); ++k)
      for (int i = 0; i < lo.dim(); ++i) {
        const double w = rng.uniform();
        mid_flat.push_back(lo.sample(k, i) + w * (hi.sample(k, i) - lo.sample(k, i)));
      }
    Segment mid(biochem.sys.delay, 3, std::move(mid_flat));
    Segment lo_img = c.apply(1.0, ShiftIndex{0}, lo);
    Segment mid_img = c.apply(1.0, ShiftIndex{0}, mid);
    Segment hi_img = c.apply(1.0, ShiftIndex{0}, hi);
    for (int k = 0; k < mid_img.sample_count(); ++k)
      for (int i = 0; i < 3; ++i) {
        CHECK(mid_img.sample(k, i) >= lo_img.sample(k, i) - disc);
        CHECK(mid_img.sample(k, i) <= hi_img.sample(k, i) + disc);
      }
  }
}

TEST_CASE("pullback: exponential contraction collapses the ensemble") {
  SystemSpec sys;
  sys.dim = 1;
  sys.delay = 0.1;
  sys.name = "contraction";
  sys.H = [](double, const Segment& eta, Vec& o) { o[0] = -eta.endpoint(0); };

  Cocycle c(sys, 37, 20.0, 0.0, 1e-2);
  std::vector<Segment> family;
  for (double v : {-2.0, -1.0, 0.0, 1.0, 2.0})
    family.push_back(Segment::constant(0.1, {v}));

  AttractorEstimate est = pullback_estimate(c, family, {5.0, 10.0, 20.0}, 1e-8);
  CHECK(est.converged);
  CHECK(est.diameter_history.back().second < 1e-8);
  for (int k = 0; k < est.upper_env.sample_count(); ++k) {
    CHECK(std::fabs(est.upper_env.sample(k, 0)) < 1e-8);
    CHECK(std::fabs(est.lower_env.sample(k, 0)) < 1e-8);
  }
  CHECK(compare_segments(est.lower_env, est.upper_env) != OrderFlag::INCOMPARABLE);
}

TEST_CASE("pullback: frozen system never shrinks") {
  SystemSpec sys;
  sys.dim = 1;
  sys.delay = 0.1;
  Cocycle c(sys, 41, 20.0, 0.0, 1e-2);
  std::vector<Segment> family;
  for (double v : {-2.0, -1.0, 0.0, 1.0, 2.0})
    family.push_back(Segment::constant(0.1, {v}));
  AttractorEstimate est = pullback_estimate(c, family, {5.0, 10.0, 20.0}, 1e-3);
  for (const auto& [t, d] : est.diameter_history) CHECK(d == 4.0);
}

TEST_CASE("biochem equilibrium: deterministic closed form (1, 1/2, 1/8)") {
  BuiltSystem b = make_builtin(
      "biochem", {{"sigma", {0.0, 0.0, 0.0}}});
  const BiochemParams& p = *b.biochem;  // alpha (1,2,4), b = 1, a = 0
  BrownianPath path = BrownianPath::sample_window(43, 42.0, 0.0, 1e-3, 3);
  EquilibriumTable table = biochem_equilibrium_table(p, path, 40.0, 1e-3, 1e-6);
  CHECK(table.value(path.origin(), 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(table.value(path.origin(), 1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(table.value(path.origin(), 2) == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(table.tail_estimate() < 1e-12);

  // b = 0 gives the zero equilibrium
  BuiltSystem z = make_builtin("biochem", {{"sigma", {0.0, 0.0, 0.0}}, {"b", {0.0}}});
  EquilibriumTable zt = biochem_equilibrium_table(*z.biochem, path, 40.0, 1e-3, 1e-6);
  for (int j = 0; j < 3; ++j) CHECK(zt.value(path.origin(), j) == 0.0);
}

TEST_CASE("biochem equilibrium: stochastic quadrature self-consistency") {
  BuiltSystem b = make_builtin("biochem", {{"alpha", {1.0}}, {"sigma", {0.2}},
                                           {"L_taps", {-0.5}}, {"L_weights", {1.0}}});
  const BiochemParams& p = *b.biochem;
  BrownianPath path40 = BrownianPath::sample_window(47, 40.5, 0.0, 5e-4, 1);
  BrownianPath path60 = BrownianPath::sample_window(47, 60.5, 0.0, 5e-4, 1);
  EquilibriumTable coarse = biochem_equilibrium_table(p, path40, 40.0, 1e-3, 1e-4);
  EquilibriumTable fine = biochem_equilibrium_table(p, path60, 60.0, 5e-4, 1e-4);
  CHECK(std::fabs(coarse.value(path40.origin(), 0) - fine.value(path60.origin(), 0)) < 1e-4);
}

TEST_CASE("equilibrium truncation error is reported") {
  BuiltSystem b = make_builtin("biochem", {{"sigma", {0.0, 0.0, 0.0}}});
  BrownianPath path = BrownianPath::sample_window(53, 3.0, 0.0, 1e-3, 3);
  CHECK_THROWS_AS(biochem_equilibrium_table(*b.biochem, path, 2.5, 1e-3, 1e-6), NumericError);
}

TEST_CASE("equilibrium consistency: the affine cocycle fixes its equilibrium") {
  // deterministic first: phi_af(t) v = v exactly up to quadrature error
  BuiltSystem aff = make_builtin("biochem", {{"sigma", {0.0, 0.0, 0.0}},
                                             {"gkind", {2.0}}});  // g == b (affine with a = 0)
  const BiochemParams& p = *aff.biochem;
  const double dt = 1e-3;
  Cocycle c(aff.sys, 59, 41.0, 2.5, dt);
  EquilibriumTable table = biochem_equilibrium_table(p, c.path(), 40.0, dt, 1e-6);

  VerificationReport rep = check_super_equilibrium(c, table, 1.0, 2.0, 1e-5);
  CHECK(rep.passed());
  // equality within quadrature + discretization error: margin also tiny
  CHECK(std::fabs(rep.statistics.at("worst_violation")) < 1e-5);

  // stochastic: scaled equilibrium stays a super-equilibrium within disc_tol
  BuiltSystem baff = make_builtin("biochem", {{"gkind", {2.0}}});
  Cocycle cs(baff.sys, 61, 41.0, 2.5, dt);
  EquilibriumTable ts = biochem_equilibrium_table(*baff.biochem, cs.path(), 40.0, dt, 1e-4);
  VerificationReport srep = check_super_equilibrium(cs, ts, 2.0, 2.0, 0.5 * std::sqrt(dt));
  CHECK(srep.passed());
}

TEST_CASE("super-equilibrium of the nonlinear circuit under the affine majorant") {
  const Vec alpha = {1.0, 2.0, 4.0};
  const Vec v = {1.0, 0.5, 0.125};
  const double dt = 1e-3, t = 2.0, r = 0.5;

  // deterministic, g == b/2 strictly below the bound: strict positive margin,
  // matching the fine-step reference
  BuiltSystem sys = make_builtin("biochem", {{"sigma", {0.0, 0.0, 0.0}},
                                             {"gkind", {2.0}}, {"gvalue", {0.5}}});
  Cocycle c(sys.sys, 67, 41.0, 2.5, dt);
  EquilibriumTable table = biochem_equilibrium_table(*sys.biochem, c.path(), 40.0, dt, 1e-6);
  VerificationReport rep = check_super_equilibrium(c, table, 1.0, 2.0, 1e-5);
  CHECK(rep.passed());
  CHECK(rep.statistics.at("margin") > 1e-3);
  const auto ref_half = circuit_reference(alpha, [](double) { return 0.5; }, r, v, t, 1e-5);
  CHECK(rep.statistics.at("margin") ==
        doctest::Approx(reference_margin(ref_half, v, 1.0, r, t, 1e-5)).epsilon(0.02));

  // lambda = 2 deterministic with the saturating g: margin from the reference
  BuiltSystem hill = make_builtin("biochem", {{"sigma", {0.0, 0.0, 0.0}}});
  Cocycle ch(hill.sys, 71, 41.0, 2.5, dt);
  EquilibriumTable th = biochem_equilibrium_table(*hill.biochem, ch.path(), 40.0, dt, 1e-6);
  VerificationReport rep2 = check_super_equilibrium(ch, th, 2.0, 2.0, 1e-5);
  CHECK(rep2.passed());
  auto g_hill = [](double u) {
    const double up = std::max(u, 0.0);
    return 1.0 * (0.5 + 0.5 * up / (1.0 + up));
  };
  Vec start = {2.0, 1.0, 0.25};  // lambda * v
  const auto ref2 = circuit_reference(alpha, g_hill, r, start, t, 1e-5);
  const double expect2 = reference_margin(ref2, v, 2.0, r, t, 1e-5);
  CHECK(expect2 > 0.0);
  CHECK(rep2.statistics.at("margin") == doctest::Approx(expect2).epsilon(0.02));
}

TEST_CASE("deterministic affine circuit against the fine-step reference") {
  BuiltSystem aff = make_builtin("biochem", {{"sigma", {0.0, 0.0, 0.0}}, {"gkind", {2.0}}});
  Cocycle c(aff.sys, 73, 1.0, 3.0, 1e-3);
  Segment eta = Segment::constant(0.5, {2.0, 1.0, 0.5});
  Segment out = c.apply(3.0, ShiftIndex{0}, eta);
  const auto ref = circuit_reference({1.0, 2.0, 4.0}, [](double) { return 1.0; }, 0.5,
                                     {2.0, 1.0, 0.5}, 3.0, 1e-5);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(out.endpoint(static_cast<int>(j)) == doctest::Approx(ref[j].back()).epsilon(5e-3));
}
