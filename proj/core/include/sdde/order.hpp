#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdde/domains.hpp"
#include "sdde/solver.hpp"

namespace sdde {

/// Two runs coupled through the same noise, with the worst positive part of
/// (lower - upper) across nodes and coordinates.
struct OrderedPair {
  SddeRun lower;
  SddeRun upper;
  double violation = 0.0;
  std::optional<std::int64_t> first_violation_node;
  std::vector<std::string> warnings;
};

/// Max over shared nodes/coords of (a - b)+ plus the first offending node.
std::pair<double, std::optional<std::int64_t>> run_order_violation(const SddeRun& a,
                                                                   const SddeRun& b);

/// An ordered pair of segments (lower <= upper) in C_D. Used by the
/// quasimonotonicity and order-preservation samplers.
std::pair<Segment, Segment> sample_ordered_segments(const DomainSpec& dom, Rng& rng, double delay,
                                                    int n_samples);

struct QuasimonotoneOptions {
  int n_pairs = 128;
  double tol = 1e-9;
  int segment_samples = 5;
  std::uint64_t seed = 11;
  double t_eval = 0.0;
  double boundary_fraction = 0.5;  // pairs conditioned near facets / near equality
};

/// Quasimonotonicity of a drift on C_D: eta >= eta* with equal i-th endpoint
/// values must give G^i(eta) >= G^i(eta*). Decomposition-invariant, so either
/// G or H may be passed.
VerificationReport check_quasimonotone(const FunctionalDrift& G, int dim, double delay,
                                       const DomainSpec& dom, const QuasimonotoneOptions& opts);

struct CompareOptions {
  double disc_tol = 0.05;        // allowed violation at this dt
  double hard_cap_factor = 10;   // violations beyond cap * disc_tol fail hard
  int dominance_samples = 32;    // sampled pre-check of G <= Gbar
  bool dominance_gate = false;   // refuse to run (vs warn) when the pre-check fails
  int structural_samples = 8;    // sampled pre-check of shared b and diffusion
  int segment_samples = 5;
  std::uint64_t seed = 13;
  const DomainSpec* domain = nullptr;  // sampling region for the pre-checks
};

/// Coupled comparison run: both systems consume the identical increment
/// stream; eta must be <= eta_star. Diffusion must be diagonal and shared.
/// Sampled violations of drift dominance G <= Gbar are recorded as warnings.
OrderedPair compare_systems(const SystemSpec& sysG, const SystemSpec& sysGbar, const Segment& eta,
                            const Segment& eta_star, const BrownianPath& path, double T, double dt,
                            const CompareOptions& opts);

/// Delayed Lotka-Volterra system on the box prod [0, R_i]:
/// dx^i = alpha_i x^i (1 - beta_i x^i - sum_j c_ij integral of x^j against
/// mu_ij) dt + sigma_i x^i (R_i - x^i) dW_i.
struct LotkaVolterraParams {
  Vec alpha, beta, R, sigma;
  Vec c;                         // d x d row-major, c_ij >= 0
  double delay = 0.5;
  std::vector<DelayMeasure> mu;  // size 1 (shared) or d x d row-major

  int dim() const { return static_cast<int>(alpha.size()); }
  const DelayMeasure& mu_at(int i, int j) const {
    return mu.size() == 1 ? mu[0] : mu[static_cast<std::size_t>(i) * dim() + j];
  }
  void validate() const;
};

SystemSpec make_lv_system(const LotkaVolterraParams& p);
/// Envelope systems: coordinate-wise logistic SDEs that bound the LV drift
/// from below (interaction replaced by its worst case sum_j c_ij R_j) and
/// from above (interaction dropped).
SystemSpec make_lv_lower_envelope(const LotkaVolterraParams& p);
SystemSpec make_lv_upper_envelope(const LotkaVolterraParams& p);

struct EnvelopeResult {
  SddeRun lower, mid, upper;
  double violation_lower = 0.0;  // positive part of (lower - mid)
  double violation_upper = 0.0;  // positive part of (mid - upper)
  std::optional<std::int64_t> first_violation_lower, first_violation_upper;
};

/// Runs the LV system between its envelopes on common noise. The lower
/// (upper) envelope starts from the coordinate-wise min (max) of eta.
EnvelopeResult lotka_volterra_envelope(const LotkaVolterraParams& p, const Segment& eta,
                                       const BrownianPath& path, double T, double dt);

}  // namespace sdde
