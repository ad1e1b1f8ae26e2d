#pragma once

#include <cstdint>
#include <vector>

#include "sdde/report.hpp"
#include "sdde/rng.hpp"
#include "sdde/segment.hpp"
#include "sdde/solver.hpp"

namespace sdde {

/// Closed region of R^d with distance and outer-normal oracles. All kinds are
/// closed with nonempty interior; POLYHEDRON verifies that at construction by
/// an interior-point search.
class DomainSpec {
public:
  enum class Kind { ORTHANT, BOX, POLYHEDRON, BALL };

  static DomainSpec orthant(int dim);
  static DomainSpec box(Vec lo, Vec hi);
  /// {x : <rows[q], x> <= offsets[q]}.
  static DomainSpec polyhedron(std::vector<Vec> rows, Vec offsets);
  static DomainSpec ball(Vec center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool convex() const { return true; }  // all supported kinds are convex
  const std::vector<Vec>& rows() const { return rows_; }
  const Vec& offsets() const { return offsets_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  /// <= 0 inside, > 0 outside. Exact Euclidean distance for ORTHANT, BOX and
  /// BALL; for POLYHEDRON the outside value is the max-over-facets surrogate
  /// max_q (<a_q,x> - gamma_q)/|a_q|, a lower bound on the true distance.
  double signed_distance(const Vec& x) const;
  bool contains(const Vec& x, double tol = 0.0) const { return signed_distance(x) <= tol; }

  const Vec& interior_point() const { return interior_; }

  /// Unit outer normals of the constraints active at x within tol.
  std::vector<Vec> normals_at(const Vec& x, double tol) const;

  int facet_count() const;

  /// A point of D (uniform for BOX and BALL, exponential tails on the
  /// ORTHANT, bounding-box rejection for POLYHEDRON).
  Vec sample_point(Rng& rng) const;

  /// A boundary point; facet >= 0 selects the facet for stratification.
  Vec sample_boundary(Rng& rng, int facet = -1) const;

  /// Segment in C_D: every sample drawn in D, so the interpolant stays in D
  /// by convexity.
  Segment sample_segment(Rng& rng, double delay, int n_samples) const;

  /// Scale used by the unbounded-kind samplers.
  void set_sample_scale(double s) { sample_scale_ = s; }
  double sample_scale() const { return sample_scale_; }

private:
  Kind kind_ = Kind::ORTHANT;
  int dim_ = 0;
  Vec lo_, hi_;             // box
  std::vector<Vec> rows_;   // polyhedron
  Vec offsets_;
  Vec center_;              // ball
  double radius_ = 1.0;
  Vec interior_;
  Vec bb_lo_, bb_hi_;       // polyhedron sampling box
  double sample_scale_ = 1.0;
};

/// A boundary point with the unit outer normals active there.
struct BoundaryProbe {
  Vec point;
  std::vector<Vec> normals;
};

inline double boundary_tol(const Vec& x) { return 1e-9 * (1.0 + norm_inf(x)); }

struct NagumoOptions {
  int n_samples = 64;                  // boundary samples (per facet where stratified)
  Vec h_schedule = {1e-2, 1e-3, 1e-4}; // decreasing steps for the one-sided limit
  double tol = 1e-7;
  int segment_samples = 5;
  std::uint64_t seed = 7;
  double t_eval = 0.0;
};

/// Boundary sub-tangency of the functional drift: samples eta in C_D with
/// eta(0) on the boundary and estimates lim h^-1 dist(eta(0) + h H, D) by a
/// Richardson extrapolation over h_schedule. On the ORTHANT the exact
/// per-facet sign test H^i >= -tol on {eta >= 0, eta^i(0) = 0} is used.
VerificationReport check_nagumo(const FunctionalDrift& H, int dim, double delay,
                                const DomainSpec& dom, const NagumoOptions& opts);

/// The h-limit estimate for one sample (exposed so tests can compare the
/// generic estimator with the orthant sign test on identical inputs).
double nagumo_limit_estimate(const FunctionalDrift& H, const Segment& eta, double t,
                             const DomainSpec& dom, const Vec& h_schedule);

/// Polyhedral facet inequality sum_i a_q^i H^i <= 0 on <a_q, eta(0)> = gamma_q,
/// tested directly without h-limits.
VerificationReport check_polyhedral_facets(const FunctionalDrift& H, int dim, double delay,
                                           const DomainSpec& dom, const NagumoOptions& opts);

struct TangencyOptions {
  int n_boundary = 64;
  bool two_sided = false;
  double tol = 1e-7;
  std::uint64_t seed = 7;
  double t_eval = 0.0;
};

/// Flow-compatibility of the instantaneous part: at boundary probes the
/// Stratonovich drift must not point outward (or must be tangent when
/// two_sided) and every diffusion column must be tangent.
VerificationReport check_diffusion_tangency(const DriftSpec& drift, const DiffusionSpec& diff,
                                            const DomainSpec& dom, const TangencyOptions& opts);

/// H_eps(t, eta) = H(t, eta) - eps * (eta(0) - e) for an interior point e.
FunctionalDrift perturb_inward(const FunctionalDrift& H, const DomainSpec& dom, const Vec& e,
                               double eps);

struct InvarianceOptions {
  int n_paths = 50;
  int n_initials = 4;
  double T = 5.0;
  Vec dt_schedule = {1e-2, 5e-3, 2.5e-3, 1.25e-3};  // halving schedule, coarse to fine
  double viol_tol_coeff = 0.5;   // violation allowance at the finest dt: coeff * dt^order
  double viol_tol_order = 0.5;
  double viol_floor = 1e-14;     // below this a violation counts as zero
  double ratio_min = 1.5;        // required mean shrink factor per halving
  int segment_samples = 6;
  std::uint64_t seed = 1;
  int workers = 0;               // 0 = default_workers()
};

/// Monte Carlo invariance: solves all (path, initial) pairs per dt with the
/// direct solver, records the worst positive signed distance, and requires
/// the violation to vanish under dt-halving. Zero violation at every dt
/// passes trivially; a blow-up fails.
VerificationReport verify_invariance_mc(const SystemSpec& sys, const DomainSpec& dom,
                                        const InvarianceOptions& opts);

/// Consistency of the three invariance views on a convex domain: a passing
/// Monte Carlo verifier plus passing tangency is incompatible with a Nagumo
/// failure beyond discretization tolerance.
VerificationReport cross_check_invariance(const VerificationReport& mc,
                                          const VerificationReport& tangency,
                                          const VerificationReport& nagumo, double margin);

}  // namespace sdde
