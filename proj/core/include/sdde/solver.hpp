#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>

#include "sdde/flow.hpp"
#include "sdde/noise.hpp"
#include "sdde/report.hpp"
#include "sdde/segment.hpp"
#include "sdde/trajectory.hpp"

namespace sdde {

/// Functional (history-dependent) drift H(t, x_t).
using FunctionalDrift = std::function<void(double t, const Segment& history, Vec& out)>;

/// A delay system: full drift G = H + b with H acting on the history segment
/// and b on the current point, plus the diffusion coefficients.
struct SystemSpec {
  int dim = 1;
  double delay = 1.0;
  FunctionalDrift H;
  DriftSpec drift;
  DiffusionSpec diffusion;
  std::string name;
  /// Free-form numeric annotations carried into run metadata. Convention:
  /// "memory_separation_beta" records that H ignores the most recent beta
  /// units of history (a global-existence criterion; recorded, not checked).
  std::map<std::string, double> metadata;

  void eval_H(double t, const Segment& seg, Vec& out) const {
    out.assign(static_cast<std::size_t>(dim), 0.0);
    if (H) H(t, seg, out);
  }
};

enum class SolverId { DIRECT, CONJUGATED };

const char* to_string(SolverId id);

/// How the conjugated solver obtains the flow: closed forms (requires the
/// diffusion to declare one) or numerical replay along the same path.
enum class FlowMode { ANALYTIC, NUMERIC };

/// One solve: trajectory on [s - r, s + T'] (T' < T only after a blow-up),
/// pinned to the initial segment on [s - r, s].
struct SddeRun {
  Trajectory trajectory;
  Segment initial;
  double start = 0.0;
  bool blowup = false;
  SolverId solver_id = SolverId::DIRECT;

  double end_time() const { return trajectory.grid().t_end(); }
};

/// Euler-Maruyama on the delay equation itself:
/// x_{n+1} = x_n + [H(t_n, x_{t_n}) + b_ito(t_n, x_n)] dt + sum_j m_j(x_n) dW_j.
/// dt must divide the initial segment's sample spacing and be an integer
/// multiple of the path step; [s, s+T] must lie inside the path window.
SddeRun solve_direct(const SystemSpec& sys, const BrownianPath& path, double s, const Segment& eta,
                     double T, double dt);

/// Conjugated (random-FDE) solver: integrates the pathwise ODE
/// zeta'(u) = {D_x Psi(u, zeta)}^{-1} H(u, x_u) with zeta(s) the flow preimage
/// of eta(0), and reconstructs x(u) = Psi(u, zeta(u)) at every node.
/// The path window must also cover [0, s+T] since the flow is anchored at 0.
SddeRun solve_conjugated(const SystemSpec& sys, const BrownianPath& path, double s,
                         const Segment& eta, double T, double dt, FlowMode mode);

/// Restarting at t must reproduce the [s,u] solve bitwise at shared nodes
/// (the direct solver is a deterministic recursion of recorded increments).
VerificationReport check_semiflow(const SystemSpec& sys, const BrownianPath& path, double s,
                                  double t, double u, const Segment& eta, double dt);

struct GrowthOptions {
  double gamma = 0.5;                          // exponent bound to test against
  int samples_per_radius = 32;
  Vec radius_schedule = {1, 2, 4, 8, 16, 32};  // segment sup-norms to probe
  int segment_samples = 9;
  std::uint64_t seed = 1;
  double margin = 0.1;                         // slack added to gamma before warning
};

/// Samples random segments of increasing sup-norm and regresses the observed
/// growth of max |H| against the radius. A heuristic: exceeding gamma yields
/// WARN, never FAIL.
VerificationReport check_growth_condition(const FunctionalDrift& H, int dim, double delay,
                                          const GrowthOptions& opts);

/// CSV export: time, x1..xd (17 significant digits).
void export_trajectory_csv(const SddeRun& run, std::ostream& os);

/// Run metadata as a canonical JSON object (seed, dt, solver_id, blowup,
/// plus any system annotations).
std::string run_metadata_json(const SddeRun& run, std::uint64_t seed, double dt,
                              const std::map<std::string, double>& annotations = {});

}  // namespace sdde
