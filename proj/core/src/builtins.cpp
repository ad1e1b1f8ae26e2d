#include "sdde/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json_canonical.hpp"
#include "sdde/errors.hpp"

namespace sdde {

namespace {

double scalar(const BuiltinParams& p, const std::string& key) {
  const Vec& v = p.at(key);
  if (v.size() != 1) throw ConfigError("parameter '" + key + "' must be a single value");
  return v[0];
}

BuiltinParams merge(const std::vector<ParamDoc>& docs, const BuiltinParams& overrides) {
  BuiltinParams out;
  for (const ParamDoc& d : docs) out[d.name] = d.default_value;
  for (const auto& [k, v] : overrides) {
    if (!out.count(k)) throw ConfigError("unknown parameter '" + k + "' for this system");
    out[k] = v;
  }
  return out;
}

DiffusionSpec diagonal_linear_stratonovich(Vec sigma) {
  DiffusionSpec diff;
  diff.drivers = static_cast<int>(sigma.size());
  diff.diagonal = true;
  diff.label = "sigma_j x_j (Stratonovich)";
  diff.coeff = [sigma](int i, int j, const Vec& x) {
    return i == j ? sigma[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] : 0.0;
  };
  diff.coeff_deriv = [sigma](int i, int j, int k, const Vec&) {
    return (i == j && k == i) ? sigma[static_cast<std::size_t>(i)] : 0.0;
  };
  AnalyticFlowForm form;
  form.kind = AnalyticFlowForm::Kind::LINEAR_STRATONOVICH;
  form.params = std::move(sigma);
  diff.closed_form = form;
  return diff;
}

DiffusionSpec diagonal_tanh_noise(int dim, double s0, double s1) {
  DiffusionSpec diff;
  diff.drivers = dim;
  diff.diagonal = true;
  diff.label = "s0 + s1 tanh(x_i)";
  diff.coeff = [s0, s1](int i, int j, const Vec& x) {
    return i == j ? s0 + s1 * std::tanh(x[static_cast<std::size_t>(i)]) : 0.0;
  };
  diff.coeff_deriv = [s1](int i, int j, int k, const Vec& x) {
    if (i != j || k != i) return 0.0;
    const double c = std::cosh(x[static_cast<std::size_t>(i)]);
    return s1 / (c * c);
  };
  return diff;
}

// --- gbm ---------------------------------------------------------------

BuiltSystem make_gbm(const BuiltinParams& overrides);
const std::vector<ParamDoc> kGbmParams = {
    {"sigma", "noise intensity per coordinate (Ito-linear)", {0.5}},
};

BuiltSystem make_gbm(const BuiltinParams& overrides) {
  const BuiltinParams p = merge(kGbmParams, overrides);
  const Vec sigma = p.at("sigma");
  const int d = static_cast<int>(sigma.size());

  BuiltSystem out;
  out.sys.dim = d;
  out.sys.delay = 1.0;  // no delay terms; kept for segment plumbing
  out.sys.name = "gbm";
  out.sys.drift.interpretation = Interpretation::ITO;
  out.sys.diffusion.drivers = d;
  out.sys.diffusion.diagonal = true;
  out.sys.diffusion.label = "sigma_i x_i (Ito)";
  out.sys.diffusion.coeff = [sigma](int i, int j, const Vec& x) {
    return i == j ? sigma[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] : 0.0;
  };
  out.sys.diffusion.coeff_deriv = [sigma](int i, int j, int k, const Vec&) {
    return (i == j && k == i) ? sigma[static_cast<std::size_t>(i)] : 0.0;
  };
  out.expect_quasimonotone = true;
  return out;
}

// --- linear-delay ------------------------------------------------------

const std::vector<ParamDoc> kLinearDelayParams = {
    {"sigma", "Stratonovich-linear noise intensity per coordinate", {0.3}},
    {"r", "delay", {0.5}},
    {"hgain", "gain of the delayed feedback H(eta) = hgain * eta(-r)", {1.0}},
};

BuiltSystem make_linear_delay(const BuiltinParams& overrides) {
  const BuiltinParams p = merge(kLinearDelayParams, overrides);
  const Vec sigma = p.at("sigma");
  const double r = scalar(p, "r");
  const double hgain = scalar(p, "hgain");
  const int d = static_cast<int>(sigma.size());

  BuiltSystem out;
  out.sys.dim = d;
  out.sys.delay = r;
  out.sys.name = "linear-delay";
  out.sys.drift.interpretation = Interpretation::STRATONOVICH;
  out.sys.diffusion = diagonal_linear_stratonovich(sigma);
  out.sys.H = [hgain, r, d](double, const Segment& eta, Vec& o) {
    for (int i = 0; i < d; ++i) o[static_cast<std::size_t>(i)] = hgain * eta.eval1(-r, i);
  };
  out.expect_quasimonotone = hgain >= 0.0;
  return out;
}

// --- lv-simplex ---------------------------------------------------------

const std::vector<ParamDoc> kLvSimplexParams = {
    {"alpha", "decay rates", {1.0, 1.0}},
    {"b", "simplex weights <b, x> <= 1", {1.0, 1.0}},
    {"sigma", "noise intensities", {0.3, 0.3}},
    {"r", "delay", {0.5}},
};

BuiltSystem make_lv_simplex(const BuiltinParams& overrides) {
  const BuiltinParams p = merge(kLvSimplexParams, overrides);
  const Vec alpha = p.at("alpha");
  const Vec b = p.at("b");
  const Vec sigma = p.at("sigma");
  const double r = scalar(p, "r");
  const int d = static_cast<int>(alpha.size());
  if (b.size() != alpha.size() || sigma.size() != alpha.size())
    throw ConfigError("lv-simplex: alpha, b, sigma must have the same size");

  BuiltSystem out;
  out.sys.dim = d;
  out.sys.delay = r;
  out.sys.name = "lv-simplex";
  out.sys.H = [alpha, b, r, d](double, const Segment& eta, Vec& o) {
    double pairing = 0.0;
    for (int j = 0; j < d; ++j) pairing += b[static_cast<std::size_t>(j)] * eta.eval1(-r, j);
    for (int i = 0; i < d; ++i)
      o[static_cast<std::size_t>(i)] =
          -alpha[static_cast<std::size_t>(i)] * eta.endpoint(i) * (1.0 - pairing);
  };
  out.sys.diffusion.drivers = d;
  out.sys.diffusion.diagonal = false;  // the slack 1 - <b,x> couples all coordinates
  out.sys.diffusion.label = "sigma_i x_i (1 - <b,x>)";
  out.sys.diffusion.coeff = [sigma, b, d](int i, int j, const Vec& x) {
    if (i != j) return 0.0;
    double pairing = 0.0;
    for (int k = 0; k < d; ++k) pairing += b[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    return sigma[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] * (1.0 - pairing);
  };
  out.sys.diffusion.coeff_deriv = [sigma, b, d](int i, int j, int k, const Vec& x) {
    if (i != j) return 0.0;
    double pairing = 0.0;
    for (int q = 0; q < d; ++q) pairing += b[static_cast<std::size_t>(q)] * x[static_cast<std::size_t>(q)];
    double v = -sigma[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] *
               b[static_cast<std::size_t>(k)];
    if (k == i) v += sigma[static_cast<std::size_t>(i)] * (1.0 - pairing);
    return v;
  };

  std::vector<Vec> rows;
  Vec offsets;
  for (int i = 0; i < d; ++i) {
    Vec row(static_cast<std::size_t>(d), 0.0);
    row[static_cast<std::size_t>(i)] = -1.0;
    rows.push_back(std::move(row));
    offsets.push_back(0.0);
  }
  rows.push_back(b);
  offsets.push_back(1.0);
  out.domain = DomainSpec::polyhedron(std::move(rows), std::move(offsets));
  out.expect_quasimonotone = true;
  return out;
}

// --- lv-box --------------------------------------------------------------

const std::vector<ParamDoc> kLvBoxParams = {
    {"alpha", "growth rates", {1.0, 1.0}},
    {"beta", "self-limitation", {1.0, 1.0}},
    {"R", "box bounds (R_i >= 1/beta_i)", {2.0, 2.0}},
    {"sigma", "noise intensities", {0.2, 0.2}},
    {"c", "interaction matrix c_ij, d x d row-major", {0.2, 0.2, 0.2, 0.2}},
    {"r", "delay", {0.5}},
    {"mu_taps", "delay measure taps (shared across pairs)", {-0.5}},
    {"mu_weights", "delay measure weights (sum 1)", {1.0}},
};

BuiltSystem make_lv_box(const BuiltinParams& overrides) {
  const BuiltinParams p = merge(kLvBoxParams, overrides);
  LotkaVolterraParams lv;
  lv.alpha = p.at("alpha");
  lv.beta = p.at("beta");
  lv.R = p.at("R");
  lv.sigma = p.at("sigma");
  lv.c = p.at("c");
  lv.delay = scalar(p, "r");
  lv.mu = {DelayMeasure{p.at("mu_taps"), p.at("mu_weights")}};

  BuiltSystem out;
  out.sys = make_lv_system(lv);
  out.domain = DomainSpec::box(Vec(lv.alpha.size(), 0.0), lv.R);
  bool interacting = false;
  for (double v : lv.c) interacting = interacting || v != 0.0;
  out.expect_quasimonotone = !interacting;  // competitive coupling breaks quasimonotonicity
  out.lv = std::move(lv);
  return out;
}

// --- biochem ---------------------------------------------------------

const std::vector<ParamDoc> kBiochemParams = {
    {"alpha", "decay rates per level", {1.0, 2.0, 4.0}},
    {"sigma", "Stratonovich-linear noise intensities", {0.2, 0.2, 0.2}},
    {"r", "delay (shared by the transport measures)", {0.5}},
    {"gkind", "0 = saturating, 1 = affine, 2 = constant", {0.0}},
    {"a", "affine bound slope (g(u) <= a u + b)", {0.0}},
    {"b", "affine bound offset", {1.0}},
    {"gvalue", "value for the constant g kind (-1 = use b)", {-1.0}},
    {"L_taps", "transport measure taps (shared across levels)", {-0.5}},
    {"L_weights", "transport measure weights (sum 1)", {1.0}},
};

BiochemParams biochem_params_from(const BuiltinParams& p) {
  BiochemParams bp;
  bp.alpha = p.at("alpha");
  bp.sigma = p.at("sigma");
  bp.delay = scalar(p, "r");
  const int gk = static_cast<int>(scalar(p, "gkind"));
  bp.g_kind = gk == 1 ? BiochemParams::GKind::AFFINE
                      : gk == 2 ? BiochemParams::GKind::CONSTANT : BiochemParams::GKind::HILL;
  bp.a = scalar(p, "a");
  bp.b_const = scalar(p, "b");
  bp.g_value = scalar(p, "gvalue");
  DelayMeasure m{p.at("L_taps"), p.at("L_weights")};
  bp.L.assign(bp.alpha.size(), m);
  return bp;
}

BuiltSystem make_biochem(const BuiltinParams& overrides) {
  const BuiltinParams p = merge(kBiochemParams, overrides);
  BiochemParams bp = biochem_params_from(p);
  BuiltSystem out;
  out.sys = make_biochem_system(bp);
  out.domain = DomainSpec::orthant(bp.dim());
  out.expect_quasimonotone = true;
  out.biochem = std::move(bp);
  return out;
}

// --- scalar-delay ------------------------------------------------------

const std::vector<ParamDoc> kScalarDelayParams = {
    {"flin", "instantaneous linear rate f(x) = flin * x", {-2.0}},
    {"ggain", "delayed feedback g(u) = ggain * tanh(u)", {0.5}},
    {"sigma0", "noise floor", {0.2}},
    {"sigma1", "noise modulation: sigma(x) = sigma0 + sigma1 tanh(x)", {0.1}},
    {"r", "delay", {1.0}},
};

BuiltSystem make_scalar_delay(const BuiltinParams& overrides) {
  const BuiltinParams p = merge(kScalarDelayParams, overrides);
  const double flin = scalar(p, "flin");
  const double ggain = scalar(p, "ggain");
  const double r = scalar(p, "r");

  BuiltSystem out;
  out.sys.dim = 1;
  out.sys.delay = r;
  out.sys.name = "scalar-delay";
  out.sys.H = [flin, ggain, r](double, const Segment& eta, Vec& o) {
    o[0] = flin * eta.endpoint(0) + ggain * std::tanh(eta.eval1(-r, 0));
  };
  out.sys.diffusion = diagonal_tanh_noise(1, scalar(p, "sigma0"), scalar(p, "sigma1"));
  out.expect_quasimonotone = ggain >= 0.0;
  return out;
}

// --- kolmogorov -------------------------------------------------------

const std::vector<ParamDoc> kKolmogorovParams = {
    {"a", "intrinsic rates", {1.0, 1.0}},
    {"B", "interaction matrix, d x d row-major", {1.0, 0.2, 0.2, 1.0}},
    {"s", "per-coordinate linear noise constants", {0.2, 0.2}},
    {"r", "delay", {0.5}},
};

BuiltSystem make_kolmogorov(const BuiltinParams& overrides) {
  const BuiltinParams p = merge(kKolmogorovParams, overrides);
  const Vec a = p.at("a");
  const Vec B = p.at("B");
  const Vec s = p.at("s");
  const double r = scalar(p, "r");
  const int d = static_cast<int>(a.size());
  if (B.size() != static_cast<std::size_t>(d) * d || s.size() != a.size())
    throw ConfigError("kolmogorov: need B of size d^2 and s of size d");

  BuiltSystem out;
  out.sys.dim = d;
  out.sys.delay = r;
  out.sys.name = "kolmogorov";
  out.sys.H = [a, B, r, d](double, const Segment& eta, Vec& o) {
    for (int i = 0; i < d; ++i) {
      double rate = a[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j)
        rate -= B[static_cast<std::size_t>(i) * d + j] * eta.eval1(-r, j);
      o[static_cast<std::size_t>(i)] = eta.endpoint(i) * rate;
    }
  };
  out.sys.drift.interpretation = Interpretation::ITO;
  out.sys.diffusion.drivers = d;
  out.sys.diffusion.diagonal = true;
  out.sys.diffusion.label = "s_i x_i";
  out.sys.diffusion.coeff = [s](int i, int j, const Vec& x) {
    return i == j ? s[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] : 0.0;
  };
  out.sys.diffusion.coeff_deriv = [s](int i, int j, int k, const Vec&) {
    return (i == j && k == i) ? s[static_cast<std::size_t>(i)] : 0.0;
  };
  out.domain = DomainSpec::orthant(d);
  bool competitive = false;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && B[static_cast<std::size_t>(i) * d + j] > 0) competitive = true;
  out.expect_quasimonotone = !competitive;
  return out;
}

// --- coupled-monotone ---------------------------------------------------

const std::vector<ParamDoc> kCoupledMonotoneParams = {
    {"A", "instantaneous coupling, d x d row-major (off-diagonals >= 0)", {-1.0, 0.3, 0.3, -1.0}},
    {"g1", "gain of the monotone delayed feedback", {0.2}},
    {"sigma0", "noise floor", {0.2}},
    {"sigma1", "noise modulation", {0.1}},
    {"r", "delay", {0.5}},
};

BuiltSystem make_coupled_monotone(const BuiltinParams& overrides) {
  const BuiltinParams p = merge(kCoupledMonotoneParams, overrides);
  const Vec A = p.at("A");
  const double g1 = scalar(p, "g1");
  const double r = scalar(p, "r");
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(A.size()))));
  if (static_cast<std::size_t>(d) * d != A.size())
    throw ConfigError("coupled-monotone: A must be square");

  BuiltSystem out;
  out.sys.dim = d;
  out.sys.delay = r;
  out.sys.name = "coupled-monotone";
  out.sys.H = [A, g1, r, d](double, const Segment& eta, Vec& o) {
    for (int i = 0; i < d; ++i) {
      double v = 0.0;
      for (int j = 0; j < d; ++j) v += A[static_cast<std::size_t>(i) * d + j] * eta.endpoint(j);
      for (int j = 0; j < d; ++j) v += g1 * std::tanh(eta.eval1(-r, j));
      o[static_cast<std::size_t>(i)] = v;
    }
  };
  out.sys.diffusion = diagonal_tanh_noise(d, scalar(p, "sigma0"), scalar(p, "sigma1"));
  bool monotone = g1 >= 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && A[static_cast<std::size_t>(i) * d + j] < 0) monotone = false;
  out.expect_quasimonotone = monotone;
  return out;
}

std::vector<BuiltinEntry> build_catalog() {
  std::vector<BuiltinEntry> cat = {
      {"biochem",
       "biochemical control circuit: monotone feedback chain with Stratonovich-linear noise",
       "orthant", kBiochemParams, &make_biochem},
      {"coupled-monotone",
       "cooperative pair: monotone instantaneous coupling plus monotone delayed feedback",
       "none (all of R^d)", kCoupledMonotoneParams, &make_coupled_monotone},
      {"gbm", "geometric Brownian motion (no delay); exact solution available", "none",
       kGbmParams, &make_gbm},
      {"kolmogorov", "population system x_i (a_i - sum_j B_ij x_j(t-r)) with linear noise",
       "orthant", kKolmogorovParams, &make_kolmogorov},
      {"linear-delay", "delayed linear feedback with Stratonovich-linear noise", "none",
       kLinearDelayParams, &make_linear_delay},
      {"lv-box", "delayed Lotka-Volterra with logistic noise; invariant box prod [0, R_i]",
       "box", kLvBoxParams, &make_lv_box},
      {"lv-simplex", "Lotka-Volterra on the simplex {x >= 0, <b,x> <= 1}", "polyhedron",
       kLvSimplexParams, &make_lv_simplex},
      {"scalar-delay", "1D contractive drift with monotone delayed feedback and bounded noise",
       "none", kScalarDelayParams, &make_scalar_delay},
  };
  std::sort(cat.begin(), cat.end(),
            [](const BuiltinEntry& a, const BuiltinEntry& b) { return a.name < b.name; });
  return cat;
}

}  // namespace

const std::vector<BuiltinEntry>& builtin_catalog() {
  static const std::vector<BuiltinEntry> cat = build_catalog();
  return cat;
}

const BuiltinEntry* find_builtin(const std::string& name) {
  for (const BuiltinEntry& e : builtin_catalog())
    if (e.name == name) return &e;
  return nullptr;
}

BuiltSystem make_builtin(const std::string& name, const BuiltinParams& overrides) {
  const BuiltinEntry* e = find_builtin(name);
  if (!e) throw ConfigError("unknown builtin system '" + name + "'");
  return e->make(overrides);
}

std::string list_builtins_text() {
  std::ostringstream os;
  for (const BuiltinEntry& e : builtin_catalog()) {
    BuiltSystem built = e.make({});
    os << e.name << "\n  " << e.summary << "\n  domain: " << e.domain_doc
       << "  diagonal: " << (built.sys.diffusion.diagonal ? "yes" : "no")
       << "  quasimonotone: " << (built.expect_quasimonotone ? "yes" : "no") << "\n  parameters:\n";
    for (const ParamDoc& p : e.params) {
      os << "    " << p.name << " = ";
      for (std::size_t i = 0; i < p.default_value.size(); ++i) {
        if (i) os << ",";
        os << p.default_value[i];
      }
      os << "  (" << p.doc << ")\n";
    }
  }
  return os.str();
}

std::string list_builtins_json() {
  nlohmann::json j;
  for (const BuiltinEntry& e : builtin_catalog()) {
    BuiltSystem built = e.make({});
    nlohmann::json je;
    je["summary"] = e.summary;
    je["domain"] = e.domain_doc;
    je["diagonal"] = built.sys.diffusion.diagonal;
    je["quasimonotone"] = built.expect_quasimonotone;
    nlohmann::json jp;
    for (const ParamDoc& p : e.params) {
      jp[p.name] = nlohmann::json::object();
      jp[p.name]["default"] = p.default_value;
      jp[p.name]["doc"] = p.doc;
    }
    je["parameters"] = jp;
    j[e.name] = je;
  }
  return detail::dump_canonical(j);
}

}  // namespace sdde
