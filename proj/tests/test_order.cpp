#include <cmath>

#include "doctest.h"
#include "sdde/builtins.hpp"
#include "sdde/order.hpp"

using namespace sdde;

namespace {

// independent reference for the deterministic delay-logistic
// x'(t) = alpha x (1 - beta x - c x(t - r)), plain Euler on its own buffer
double delay_logistic_reference(double alpha, double beta, double c, double r, double x0,
                                double T, double dt) {
  const auto lag = static_cast<std::size_t>(std::llround(r / dt));
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  std::vector<double> x(steps + 1);
  std::vector<double> hist(lag, x0);  // constant history
  x[0] = x0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double delayed = n >= lag ? x[n - lag] : hist[n];
    x[n + 1] = x[n] + dt * alpha * x[n] * (1.0 - beta * x[n] - c * delayed);
  }
  return x[steps];
}

}  // namespace

TEST_CASE("quasimonotone: endpoint-only drift passes") {
  FunctionalDrift G = [](double, const Segment& eta, Vec& o) {
    for (int i = 0; i < eta.dim(); ++i) o[static_cast<std::size_t>(i)] = eta.endpoint(i);
  };
  QuasimonotoneOptions opts;
  VerificationReport rep = check_quasimonotone(G, 2, 0.5, DomainSpec::box({0, 0}, {2, 2}), opts);
  CHECK(rep.passed());
}

TEST_CASE("quasimonotone: monotone delayed feedback passes in 1D") {
  FunctionalDrift G = [](double, const Segment& eta, Vec& o) {
    o[0] = std::tanh(eta.eval1(-1.0, 0));  // nondecreasing g
  };
  QuasimonotoneOptions opts;
  VerificationReport rep = check_quasimonotone(G, 1, 1.0, DomainSpec::box({-2}, {2}), opts);
  CHECK(rep.passed());
}

TEST_CASE("quasimonotone: decreasing cross coupling fails with a counterexample") {
  FunctionalDrift G = [](double, const Segment& eta, Vec& o) {
    o[0] = -eta.endpoint(1);
    o[1] = 0.0;
  };
  QuasimonotoneOptions opts;
  VerificationReport rep = check_quasimonotone(G, 2, 0.5, DomainSpec::box({0, 0}, {2, 2}), opts);
  CHECK(rep.failed());
  CHECK(!rep.counterexamples.empty());
}

TEST_CASE("quasimonotone expectations of the catalog systems") {
  QuasimonotoneOptions opts;
  opts.n_pairs = 196;

  BuiltSystem biochem = make_builtin("biochem");
  CHECK(check_quasimonotone(biochem.sys.H, biochem.sys.dim, biochem.sys.delay, *biochem.domain,
                            opts)
            .passed());

  BuiltSystem lv = make_builtin("lv-box");  // competitive: not quasimonotone
  CHECK(check_quasimonotone(lv.sys.H, lv.sys.dim, lv.sys.delay, *lv.domain, opts).failed());

  SystemSpec lower = make_lv_lower_envelope(*lv.lv);
  SystemSpec upper = make_lv_upper_envelope(*lv.lv);
  CHECK(check_quasimonotone(lower.H, 2, 0.5, *lv.domain, opts).passed());
  CHECK(check_quasimonotone(upper.H, 2, 0.5, *lv.domain, opts).passed());

  BuiltSystem simplex = make_builtin("lv-simplex");
  CHECK(check_quasimonotone(simplex.sys.H, 2, 0.5, *simplex.domain, opts).passed());
}

TEST_CASE("compare_systems: zero vs unit drift without noise") {
  SystemSpec zero, one;
  zero.dim = one.dim = 1;
  zero.delay = one.delay = 0.5;
  one.H = [](double, const Segment&, Vec& o) { o[0] = 1.0; };
  zero.diffusion.diagonal = one.diffusion.diagonal = true;

  BrownianPath path = BrownianPath::sample_window(1, 0.0, 2.0, 1e-2, 1);
  Segment eta = Segment::constant(0.5, {0.0});
  CompareOptions opts;
  OrderedPair pair = compare_systems(zero, one, eta, eta, path, 2.0, 1e-2, opts);
  CHECK(pair.violation == 0.0);
  CHECK(!pair.first_violation_node.has_value());
  const std::int64_t last = pair.upper.trajectory.grid().n_steps;
  CHECK(pair.upper.trajectory.value(last, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pair.lower.trajectory.value(last, 0) == 0.0);
}

TEST_CASE("compare_systems: reflexive coupling is bitwise zero") {
  BuiltSystem lv = make_builtin("lv-box");
  BrownianPath path = BrownianPath::sample_window(2, 0.0, 2.0, 1e-3, 2);
  Segment eta = Segment::constant(0.5, {0.7, 1.1});
  CompareOptions opts;
  OrderedPair pair = compare_systems(lv.sys, lv.sys, eta, eta, path, 2.0, 1e-3, opts);
  CHECK(pair.violation == 0.0);
  for (std::int64_t k = 0; k <= pair.lower.trajectory.grid().n_steps; ++k)
    for (int c = 0; c < 2; ++c)
      CHECK(pair.lower.trajectory.value(k, c) == pair.upper.trajectory.value(k, c));
}

TEST_CASE("compare_systems rejects non-diagonal diffusion and unordered initials") {
  BuiltSystem simplex = make_builtin("lv-simplex");  // non-diagonal
  BrownianPath path = BrownianPath::sample_window(3, 0.0, 1.0, 1e-2, 2);
  Segment eta = Segment::constant(0.5, {0.2, 0.2});
  CompareOptions opts;
  CHECK_THROWS_AS(
      compare_systems(simplex.sys, simplex.sys, eta, eta, path, 1.0, 1e-2, opts),
      UnsupportedError);

  BuiltSystem lv = make_builtin("lv-box");
  Segment above = Segment::constant(0.5, {0.5, 0.5});
  Segment below(0.5, 2, {0.1, 0.9, 0.1, 0.9});  // neither <= nor >=
  Segment mixed(0.5, 2, {0.6, 0.1, 0.6, 0.1});
  CHECK_THROWS_AS(compare_systems(lv.sys, lv.sys, mixed, below, path, 1.0, 1e-2, opts),
                  ShapeError);
}

TEST_CASE("compare_systems warns when sampled dominance fails") {
  SystemSpec lo, hi;
  lo.dim = hi.dim = 1;
  lo.delay = hi.delay = 0.5;
  lo.H = [](double, const Segment&, Vec& o) { o[0] = 1.0; };   // actually above
  hi.H = [](double, const Segment&, Vec& o) { o[0] = -1.0; };  // actually below
  lo.diffusion.diagonal = hi.diffusion.diagonal = true;
  BrownianPath path = BrownianPath::sample_window(4, 0.0, 1.0, 1e-2, 1);
  Segment eta = Segment::constant(0.5, {0.0});
  DomainSpec box = DomainSpec::box({-1.0}, {1.0});
  CompareOptions opts;
  opts.domain = &box;
  OrderedPair pair = compare_systems(lo, hi, eta, eta, path, 1.0, 1e-2, opts);
  CHECK(!pair.warnings.empty());
  CHECK(pair.violation > 0.0);
}

TEST_CASE("lv envelope: interaction off collapses the sandwich") {
  BuiltSystem lv = make_builtin("lv-box", {{"c", {0.0, 0.0, 0.0, 0.0}}});
  BrownianPath path = BrownianPath::sample_window(5, 0.0, 2.0, 1e-3, 2);
  Segment eta = Segment::constant(0.5, {0.8, 1.2});
  EnvelopeResult res = lotka_volterra_envelope(*lv.lv, eta, path, 2.0, 1e-3);
  // with c = 0 and constant eta all three solve the same logistic SDE
  CHECK(res.violation_lower <= 1e-12);
  CHECK(res.violation_upper <= 1e-12);
  const std::int64_t last = res.mid.trajectory.grid().n_steps;
  CHECK(res.lower.trajectory.value(last, 0) == doctest::Approx(res.mid.trajectory.value(last, 0)));
  CHECK(res.upper.trajectory.value(last, 0) == doctest::Approx(res.mid.trajectory.value(last, 0)));
}

TEST_CASE("lv envelope: deterministic sandwich against the reference integrator") {
  // d = 1, alpha = beta = 1, c = 0.5, R = 2, sigma = 0, point mass at -r
  LotkaVolterraParams p;
  p.alpha = {1.0};
  p.beta = {1.0};
  p.R = {2.0};
  p.sigma = {0.0};
  p.c = {0.5};
  p.delay = 0.5;
  p.mu = {DelayMeasure::point_mass(-0.5)};

  BrownianPath path = BrownianPath::sample_window(6, 0.0, 2.0, 1e-5, 1);
  Segment eta = Segment::constant(0.5, {0.6});

  // sandwich holds exactly in the ODE limit
  EnvelopeResult fine = lotka_volterra_envelope(p, eta, path, 2.0, 1e-5);
  CHECK(fine.violation_lower <= 1e-12);
  CHECK(fine.violation_upper <= 1e-12);

  // the mid run converges to the reference delay-logistic
  const double ref = delay_logistic_reference(1.0, 1.0, 0.5, 0.5, 0.6, 2.0, 1e-5);
  const std::int64_t last = fine.mid.trajectory.grid().n_steps;
  CHECK(fine.mid.trajectory.value(last, 0) == doctest::Approx(ref).epsilon(1e-9));

  BrownianPath coarse_path = BrownianPath::sample_window(6, 0.0, 2.0, 1e-3, 1);
  EnvelopeResult coarse = lotka_volterra_envelope(p, eta, coarse_path, 2.0, 1e-3);
  const std::int64_t cl = coarse.mid.trajectory.grid().n_steps;
  CHECK(std::fabs(coarse.mid.trajectory.value(cl, 0) - ref) < 2e-3);
}

TEST_CASE("lv envelope: stochastic d = 2 sandwich stays within tolerance") {
  BuiltSystem lv = make_builtin("lv-box");  // alpha (1,1) beta (1,1) c 0.2 R (2,2) sigma (0.2,0.2)
  Segment eta(0.5, 2, {0.4, 1.3, 0.7, 0.9, 0.6, 1.1});
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    BrownianPath path = BrownianPath::sample_window(100 + s, 0.0, 5.0, 1e-3, 2);
    EnvelopeResult res = lotka_volterra_envelope(*lv.lv, eta, path, 5.0, 1e-3);
    worst = std::max({worst, res.violation_lower, res.violation_upper});
  }
  CHECK(worst <= 0.05 * std::sqrt(1e-3));  // K sqrt(dt) with a generous K
}

TEST_CASE("lv params validation") {
  LotkaVolterraParams p;
  p.alpha = {1.0};
  p.beta = {1.0};
  p.R = {0.5};  // violates R >= 1/beta
  p.sigma = {0.1};
  p.c = {0.0};
  p.mu = {DelayMeasure::point_mass(-0.5)};
  p.delay = 0.5;
  CHECK_THROWS_AS(p.validate(), ShapeError);
}

TEST_CASE("comparison against the zero system reproduces orthant invariance") {
  // quasimonotone drift, G(0) >= 0, diffusion vanishing at 0: coupling the
  // circuit with the zero-drift system started at 0 keeps it above zero,
  // which is the same statement the Monte Carlo verifier makes
  BuiltSystem biochem = make_builtin("biochem");
  SystemSpec zero = biochem.sys;
  zero.H = FunctionalDrift{};
  zero.name = "zero-drift";

  Segment origin = Segment::constant(0.5, {0.0, 0.0, 0.0}, 6);
  Rng rng(71);
  DomainSpec box = DomainSpec::box({0, 0, 0}, {2, 2, 2});
  CompareOptions opts;
  opts.domain = &box;

  double worst = 0.0;
  for (int s = 0; s < 5; ++s) {
    BrownianPath path = BrownianPath::sample_window(800 + s, 0.0, 3.0, 1e-2, 3);
    Segment eta = box.sample_segment(rng, 0.5, 6);
    OrderedPair pair = compare_systems(zero, biochem.sys, origin, eta, path, 3.0, 1e-2, opts);
    worst = std::max(worst, pair.violation);
    // the zero system is exactly frozen at the origin
    const std::int64_t last = pair.lower.trajectory.grid().n_steps;
    for (int c = 0; c < 3; ++c) CHECK(pair.lower.trajectory.value(last, c) == 0.0);
  }
  CHECK(worst == 0.0);  // the circuit never goes below zero on these paths

  // cross-check: the Monte Carlo verifier agrees on the same system
  InvarianceOptions iopts;
  iopts.n_paths = 5;
  iopts.n_initials = 2;
  iopts.T = 2.0;
  iopts.dt_schedule = {1e-2, 5e-3};
  iopts.segment_samples = 6;
  CHECK(verify_invariance_mc(biochem.sys, DomainSpec::orthant(3), iopts).passed());
}

TEST_CASE("dominance gate refuses undominated pairs when enabled") {
  SystemSpec lo, hi;
  lo.dim = hi.dim = 1;
  lo.delay = hi.delay = 0.5;
  lo.H = [](double, const Segment&, Vec& o) { o[0] = 1.0; };
  hi.H = [](double, const Segment&, Vec& o) { o[0] = -1.0; };
  lo.diffusion.diagonal = hi.diffusion.diagonal = true;
  BrownianPath path = BrownianPath::sample_window(4, 0.0, 1.0, 1e-2, 1);
  Segment eta = Segment::constant(0.5, {0.0});
  DomainSpec box = DomainSpec::box({-1.0}, {1.0});
  CompareOptions opts;
  opts.domain = &box;
  opts.dominance_gate = true;
  CHECK_THROWS_AS(compare_systems(lo, hi, eta, eta, path, 1.0, 1e-2, opts), UnsupportedError);
}

TEST_CASE("strict variant: strongly ordered data keeps strict order at every dt") {
  // eta << eta* (STRONG) and H << Hbar on the sampling box: no node violation
  // at any tested dt
  BuiltSystem lo = make_builtin("linear-delay", {{"hgain", {0.5}}});
  BuiltSystem hi = make_builtin("linear-delay", {{"hgain", {1.0}}});
  Segment eta = Segment::constant(0.5, {0.5});
  Segment eta_star = Segment::constant(0.5, {1.0});
  REQUIRE(compare_segments(eta, eta_star) == OrderFlag::STRONG);
  DomainSpec box = DomainSpec::box({0.1}, {3.0});
  CompareOptions opts;
  opts.domain = &box;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    for (int s = 0; s < 5; ++s) {
      BrownianPath path = BrownianPath::sample_window(900 + s, 0.0, 2.0, dt, 1);
      OrderedPair pair = compare_systems(lo.sys, hi.sys, eta, eta_star, path, 2.0, dt, opts);
      CHECK(pair.violation == 0.0);
      CHECK(pair.warnings.empty());
    }
  }
}
