#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sdde/domains.hpp"
#include "sdde/noise.hpp"
#include "sdde/order.hpp"
#include "sdde/solver.hpp"

namespace sdde {

/// The solution cocycle of an autonomous system over the Wiener shift. All
/// applications with the same base seed share one underlying path;
/// time shifts are whole grid steps of that path.
class Cocycle {
public:
  /// Rejects time-dependent systems (checked by sampled evaluation).
  Cocycle(SystemSpec sys, std::uint64_t base_seed, double t_minus, double t_plus, double dt);

  const SystemSpec& system() const { return sys_; }
  const BrownianPath& path() const { return path_; }
  double dt() const { return dt_; }
  std::uint64_t base_seed() const { return seed_; }

  /// Shift measured in whole path steps for a duration t >= 0 (t = 0 maps
  /// to the zero shift).
  ShiftIndex steps_of(double t) const;

  /// [phi(t, theta_shift w) eta]: solves from 0 to t on the shifted path and
  /// assembles the history segment at t (trajectory where t + tau > 0, the
  /// initial segment where t + tau <= 0). t = 0 returns eta unchanged.
  Segment apply(double t, ShiftIndex shift, const Segment& eta) const;

  /// The full run behind apply(), for tests that inspect trajectories.
  SddeRun run(double t, ShiftIndex shift, const Segment& eta) const;

private:
  SystemSpec sys_;
  std::uint64_t seed_;
  double dt_;
  BrownianPath path_;
};

/// Functional alias of Cocycle::apply.
Segment cocycle_apply(const Cocycle& c, double t, ShiftIndex shift, const Segment& eta);

/// phi(t+s, w) must equal phi(t, theta_s w) . phi(s, w) bitwise at all
/// segment nodes: both sides replay identical increments by index.
VerificationReport check_cocycle_property(const Cocycle& c, double t, double s,
                                          const std::vector<Segment>& etas);

struct OrderPreservationOptions {
  int n_pairs = 20;
  double disc_tol = 0.05;
  int segment_samples = 5;
  std::uint64_t seed = 17;
  bool gate_on_quasimonotone = true;
  int quasimonotone_pairs = 64;
};

/// For quasimonotone drifts the cocycle must preserve the segment order:
/// samples ordered pairs in C_D and checks phi(t,w)eta <= phi(t,w)xi within
/// disc_tol at every node.
VerificationReport check_order_preserving(const Cocycle& c, double t, const DomainSpec& dom,
                                          const OrderPreservationOptions& opts);

/// Envelopes and diameter of the pullback images at time 0.
struct AttractorEstimate {
  Segment lower_env, upper_env;
  std::vector<std::pair<double, double>> diameter_history;  // (pullback time, diameter)
  bool converged = false;
};

/// Images phi(t, theta_{-t} w) D for increasing pullback times t: applies the
/// cocycle from the shifted past to every initial segment and records the
/// coordinate-wise envelopes and ensemble diameter at time 0.
AttractorEstimate pullback_estimate(const Cocycle& c, const std::vector<Segment>& initial_family,
                                    const Vec& pullback_times, double diam_tol);

/// Stochastic biochemical control circuit: a feedback chain
/// dx^1 = (g(L_d x^d_t) - alpha_1 x^1) dt + sigma_1 x^1 o dW^1,
/// dx^j = (L_{j-1} x^{j-1}_t - alpha_j x^j) dt + sigma_j x^j o dW^j.
struct BiochemParams {
  enum class GKind { HILL, AFFINE, CONSTANT };

  Vec alpha;                    // positive rates, one per coordinate
  Vec sigma;                    // nonnegative noise intensities
  GKind g_kind = GKind::HILL;
  double a = 0.0;               // affine bound g(u) <= a*u + b_const
  double b_const = 1.0;
  double g_value = -1.0;        // CONSTANT kind; defaults to b_const
  std::vector<DelayMeasure> L;  // L[j] feeds equation j+1; L[d-1] feeds equation 1
  double delay = 0.5;           // r = max_j r_j

  int dim() const { return static_cast<int>(alpha.size()); }
  void validate() const;
  double g(double u) const;
};

/// The nonlinear circuit and its affine majorant (g replaced by a*u + b).
SystemSpec make_biochem_system(const BiochemParams& p);
SystemSpec make_biochem_affine(const BiochemParams& p);

/// The equilibrium v(theta_u w) of the affine majorant with a = 0, tabulated
/// on the path grid: v_1 = b * integral of exp(alpha_1 t - sigma_1 W^1_t),
/// v_j from the previous level through L_{j-1}, all by trapezoid quadrature
/// of the truncated integrals.
class EquilibriumTable {
public:
  EquilibriumTable(const BrownianPath* path, std::int64_t stride, int dim);

  double value(std::int64_t path_node, int j) const;
  double value_at_time(double u, int j) const;  // linear between table nodes
  double tail_estimate() const { return tail_; }
  double earliest_reliable_time() const { return reliable_from_; }
  const BrownianPath& path() const { return *path_; }

  /// Segment tau -> v(theta_{u0 + tau} w), tau in [-delay, 0], sampled at dt.
  Segment segment_at(double u0, double delay, double dt) const;

  friend EquilibriumTable biochem_equilibrium_table(const BiochemParams&, const BrownianPath&,
                                                    double, double, double);

private:
  const BrownianPath* path_;
  std::int64_t stride_;
  int dim_;
  std::vector<double> values_;  // quad-node-major
  double tail_ = 0.0;
  double reliable_from_ = 0.0;
};

/// pre: a == 0; the path window must reach back at least T_trunc + delay
/// before time 0. Throws NumericError when the estimated truncation tail
/// exceeds quad_tol.
EquilibriumTable biochem_equilibrium_table(const BiochemParams& p, const BrownianPath& path,
                                           double T_trunc, double dt, double quad_tol);

/// The equilibrium segment tau -> v(theta_tau w) on [-delay, 0].
Segment biochem_equilibrium(const BiochemParams& p, const BrownianPath& path, double T_trunc,
                            double dt, double quad_tol);

/// phi(t, w)(lambda v(w)) <= lambda v(theta_t w) within disc_tol node-wise:
/// the scaled affine equilibrium dominates the nonlinear circuit.
/// The cocycle must share the table's path (same seed and step).
VerificationReport check_super_equilibrium(const Cocycle& c, const EquilibriumTable& v,
                                           double lambda, double t, double disc_tol);

}  // namespace sdde
