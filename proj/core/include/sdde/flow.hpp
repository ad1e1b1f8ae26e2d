#pragma once

#include <functional>
#include <optional>
#include <string>

#include "sdde/linalg.hpp"
#include "sdde/noise.hpp"

namespace sdde {

enum class Interpretation { ITO, STRATONOVICH };

/// Families whose flow, spatial derivative and inverse have closed forms:
/// zero coefficients, additive constants, and per-coordinate linear
/// Stratonovich noise (whose flow is x * exp(sigma_j W^j)). The instantaneous
/// drift must vanish in the tagged interpretation.
struct AnalyticFlowForm {
  enum class Kind { ZERO, ADDITIVE_CONSTANT, LINEAR_STRATONOVICH };
  Kind kind = Kind::ZERO;
  Vec params;  // ADDITIVE_CONSTANT: dim x drivers, row-major; LINEAR_STRATONOVICH: sigma per coordinate
};

/// Diffusion coefficients m^i_j(x) for finitely many Brownian drivers.
/// `diagonal` means m^i_j depends on x^i only (required by the comparison
/// machinery). `coeff_deriv` is the analytic partial d m^i_j / d x_k; when
/// absent, derivatives fall back to central differences.
struct DiffusionSpec {
  int drivers = 0;
  std::function<double(int i, int j, const Vec& x)> coeff;
  std::function<double(int i, int j, int k, const Vec& x)> coeff_deriv;
  bool diagonal = false;
  std::string label;
  std::optional<AnalyticFlowForm> closed_form;

  bool is_zero() const { return drivers == 0 || !coeff; }
  double eval(int i, int j, const Vec& x) const { return is_zero() ? 0.0 : coeff(i, j, x); }
  double deriv(int i, int j, int k, const Vec& x) const;
};

/// Instantaneous drift b(t, x) with its interpretation tag. The jacobian is
/// optional; central differences with step 1e-5*(1+|x|) stand in when absent.
struct DriftSpec {
  std::function<void(double t, const Vec& x, Vec& out)> b;
  std::function<void(double t, const Vec& x, Mat& out)> jacobian;
  Interpretation interpretation = Interpretation::ITO;

  bool is_zero() const { return !b; }
  void eval(double t, const Vec& x, Vec& out) const;
  void jac(double t, const Vec& x, Mat& out) const;
};

/// Outcome of evolving the non-delay flow: the point, its spatial derivative
/// (d scalars for diagonal flows, d x d row-major otherwise), and whether the
/// guard bound was hit.
struct FlowResult {
  Vec point;
  std::vector<double> jacobian;
  bool jacobian_is_diagonal = false;
  bool blowup = false;
};

/// Any coordinate beyond this bound flags the trajectory as blown up.
inline constexpr double kBlowupGuard = 1e8;

/// Finite-difference step for spatial derivatives.
inline double fd_step(const Vec& x) { return 1e-5 * (1.0 + norm_inf(x)); }

/// Treats `drift` as Stratonovich and returns the equivalent Ito drift
/// b^i + 1/2 sum_j sum_k m^k_j dm^i_j/dx_k, tagged ITO.
DriftSpec stratonovich_to_ito(const DriftSpec& drift, const DiffusionSpec& diff);

/// Companion with the correction negated, tagged STRATONOVICH.
DriftSpec ito_to_stratonovich(const DriftSpec& drift, const DiffusionSpec& diff);

/// The drift in Ito (resp. Stratonovich) form, honouring the input tag.
DriftSpec effective_ito_drift(const DriftSpec& drift, const DiffusionSpec& diff);
DriftSpec effective_stratonovich_drift(const DriftSpec& drift, const DiffusionSpec& diff);

/// Euler-Maruyama evolution of the flow from (s, x) to time t along `path`,
/// with the spatial derivative advanced by the linearized recursion.
/// dt must be an integer multiple of the path step; s, t path nodes.
FlowResult flow_evolve(const DriftSpec& drift, const DiffusionSpec& diff, const BrownianPath& path,
                       double s, double t, const Vec& x, double dt);

/// Inverse flow xi(u, x): the preimage under the time-0-anchored flow,
/// computed by inverting each recorded Euler step from u back down to 0 by
/// fixed-point iteration (at most 50 iterations, tolerance 1e-12*(1+|x|)).
Vec flow_inverse(const DriftSpec& drift, const DiffusionSpec& diff, const BrownianPath& path,
                 double u, const Vec& x, double dt);

/// Closed-form linear Stratonovich flow x^j * exp(sigma_j W^j(t)) and its
/// x-independent spatial derivative / inverse.
Vec gbm_flow_exact(const Vec& sigma, const BrownianPath& path, double t, const Vec& x);
Vec gbm_flow_derivative(const Vec& sigma, const BrownianPath& path, double t);
Vec gbm_flow_inverse(const Vec& sigma, const BrownianPath& path, double t, const Vec& x);

/// Evaluation handle for an AnalyticFlowForm along a fixed path. The spatial
/// derivative in these families does not depend on the point.
class AnalyticFlow {
public:
  AnalyticFlow(AnalyticFlowForm form, int dim, const BrownianPath* path);

  void value(double t, const Vec& z, Vec& out) const;
  void deriv_diag(double t, Vec& out) const;
  void inverse(double t, const Vec& x, Vec& out) const;

private:
  AnalyticFlowForm form_;
  int dim_;
  const BrownianPath* path_;
};

}  // namespace sdde
