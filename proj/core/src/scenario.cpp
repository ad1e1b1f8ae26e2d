#include "sdde/scenario.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json_canonical.hpp"
#include "sdde/builtins.hpp"
#include "sdde/domains.hpp"
#include "sdde/errors.hpp"
#include "sdde/io.hpp"
#include "sdde/order.hpp"
#include "sdde/parallel.hpp"
#include "sdde/rds.hpp"
#include "sdde/rng.hpp"
#include "sdde/solver.hpp"

namespace sdde {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------
// Text scenario format -> json. Grammar (documented in the README):
//   # comment to end of line
//   [section] / [section.sub]      nested object
//   [[section.list]]               append an object to an array
//   key = value                    inside the current section
// Values: number | true | false | "quoted string" | bare-string |
//         comma-separated numbers (a vector).
// ---------------------------------------------------------------------

json parse_value(const std::string& raw, int line) {
  std::string s = raw;
  const auto l = s.find_first_not_of(" \t");
  const auto r = s.find_last_not_of(" \t");
  if (l == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": empty value");
  s = s.substr(l, r - l + 1);

  if (s == "true") return true;
  if (s == "false") return false;
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);

  if (s.find(',') != std::string::npos) {
    json arr = json::array();
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw std::invalid_argument("");
        arr.push_back(v);
      } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": '" + item +
                          "' is not a number in a numeric list");
      }
    }
    return arr;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used == s.size()) return v;
  } catch (...) {
  }
  return s;  // bare string
}

json* descend(json& root, const std::string& path, int line, bool array_elem) {
  json* cur = &root;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty())
      throw ConfigError("line " + std::to_string(line) + ": empty section name component");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const bool last = i + 1 == parts.size();
    json& slot = (*cur)[parts[i]];
    if (last && array_elem) {
      if (slot.is_null()) slot = json::array();
      if (!slot.is_array())
        throw ConfigError("line " + std::to_string(line) + ": [" + path + "] is not a list");
      slot.push_back(json::object());
      cur = &slot.back();
    } else {
      if (slot.is_null()) slot = json::object();
      if (slot.is_array()) {
        if (slot.empty())
          throw ConfigError("line " + std::to_string(line) + ": list section '" + parts[i] +
                            "' has no elements yet");
        cur = &slot.back();
      } else if (slot.is_object()) {
        cur = &slot;
      } else {
        throw ConfigError("line " + std::to_string(line) + ": '" + parts[i] +
                          "' already holds a value");
      }
    }
  }
  return cur;
}

json parse_scenario_text(std::istream& is) {
  json root = json::object();
  json* section = &root;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto l = line.find_first_not_of(" \t\r");
    if (l == std::string::npos) continue;
    const auto r = line.find_last_not_of(" \t\r");
    const std::string body = line.substr(l, r - l + 1);

    if (body.size() >= 4 && body.substr(0, 2) == "[[" && body.substr(body.size() - 2) == "]]") {
      section = descend(root, body.substr(2, body.size() - 4), lineno, true);
      continue;
    }
    if (body.front() == '[' && body.back() == ']') {
      section = descend(root, body.substr(1, body.size() - 2), lineno, false);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = body.substr(0, eq);
    const auto kr = key.find_last_not_of(" \t");
    if (kr == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": missing key");
    key = key.substr(0, kr + 1);
    if ((*section).contains(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    (*section)[key] = parse_value(body.substr(eq + 1), lineno);
  }
  return root;
}

json load_scenario(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open scenario file '" + file + "'");
  // JSON alternative encoding: first non-space character is '{'
  char c = 0;
  while (is.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  is.seekg(0);
  if (c == '{') {
    try {
      json j;
      is >> j;
      return j;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("JSON scenario parse error: ") + e.what());
    }
  }
  return parse_scenario_text(is);
}

// ---------------------------------------------------------------------
// typed access with exact error messages
// ---------------------------------------------------------------------

const json* maybe(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  const json* p = maybe(j, key);
  if (!p) throw ConfigError("missing required key '" + key + "' in " + where);
  return *p;
}

double need_num(const json& j, const std::string& key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) throw ConfigError("'" + key + "' in " + where + " must be a number");
  return v.get<double>();
}

double num_or(const json& j, const std::string& key, double fallback) {
  const json* p = maybe(j, key);
  if (!p) return fallback;
  if (!p->is_number()) throw ConfigError("'" + key + "' must be a number");
  return p->get<double>();
}

std::string need_str(const json& j, const std::string& key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string()) throw ConfigError("'" + key + "' in " + where + " must be a string");
  return v.get<std::string>();
}

Vec as_vec(const json& v, const std::string& what) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) {
    Vec out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(what + " must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  throw ConfigError(what + " must be a number or a list of numbers");
}

Vec need_vec(const json& j, const std::string& key, const std::string& where) {
  return as_vec(need(j, key, where), "'" + key + "' in " + where);
}

Vec vec_or(const json& j, const std::string& key, const Vec& fallback) {
  const json* p = maybe(j, key);
  return p ? as_vec(*p, "'" + key + "'") : fallback;
}

// ---------------------------------------------------------------------
// inline (data-only) system spec: polynomial drift terms with optional
// tabulated scalar factor, diagonal polynomial diffusion
// ---------------------------------------------------------------------

struct TableFn {
  Vec u, v;
  double operator()(double x) const {
    if (x <= u.front()) return v.front();
    if (x >= u.back()) return v.back();
    for (std::size_t k = 1; k < u.size(); ++k)
      if (x <= u[k]) {
        const double w = (x - u[k - 1]) / (u[k] - u[k - 1]);
        return v[k - 1] + w * (v[k] - v[k - 1]);
      }
    return v.back();
  }
};

SystemSpec make_inline_system(const json& js) {
  SystemSpec sys;
  sys.dim = static_cast<int>(need_num(js, "dim", "[system]"));
  sys.delay = need_num(js, "delay", "[system]");
  sys.name = "inline";
  const std::string interp = need_str(js, "interpretation", "[system]");
  if (interp == "ito")
    sys.drift.interpretation = Interpretation::ITO;
  else if (interp == "stratonovich")
    sys.drift.interpretation = Interpretation::STRATONOVICH;
  else
    throw ConfigError("[system] interpretation must be 'ito' or 'stratonovich'");

  struct Term {
    int coord;
    double coeff;
    std::vector<std::array<double, 3>> factors;  // coord(1-based), tau, power
    bool has_table = false;
    TableFn table;
    int table_coord = 0;
    double table_tau = 0.0;
  };
  std::vector<Term> terms;
  if (const json* arr = maybe(js, "drift_term")) {
    if (!arr->is_array()) throw ConfigError("[system] drift_term must be a list of tables");
    for (const json& jt : *arr) {
      Term t;
      t.coord = static_cast<int>(need_num(jt, "coord", "[[system.drift_term]]")) - 1;
      if (t.coord < 0 || t.coord >= sys.dim)
        throw ConfigError("[[system.drift_term]] coord out of range");
      t.coeff = need_num(jt, "coeff", "[[system.drift_term]]");
      const Vec fc = vec_or(jt, "factor_coord", {});
      const Vec ft = vec_or(jt, "factor_tau", {});
      const Vec fp = vec_or(jt, "factor_power", Vec(fc.size(), 1.0));
      if (fc.size() != ft.size() || fc.size() != fp.size())
        throw ConfigError("[[system.drift_term]] factor_coord/tau/power sizes differ");
      for (std::size_t k = 0; k < fc.size(); ++k) {
        const int c = static_cast<int>(fc[k]) - 1;
        if (c < 0 || c >= sys.dim) throw ConfigError("[[system.drift_term]] factor coord out of range");
        if (ft[k] < -sys.delay - 1e-12 || ft[k] > 1e-12)
          throw ConfigError("[[system.drift_term]] factor tau outside [-delay, 0]");
        t.factors.push_back({static_cast<double>(c), ft[k], fp[k]});
      }
      if (maybe(jt, "table_u")) {
        t.has_table = true;
        t.table.u = need_vec(jt, "table_u", "[[system.drift_term]]");
        t.table.v = need_vec(jt, "table_v", "[[system.drift_term]]");
        if (t.table.u.size() != t.table.v.size() || t.table.u.size() < 2)
          throw ConfigError("[[system.drift_term]] table_u/table_v need >= 2 matching points");
        for (std::size_t k = 1; k < t.table.u.size(); ++k)
          if (!(t.table.u[k] > t.table.u[k - 1]))
            throw ConfigError("[[system.drift_term]] table_u must be strictly increasing");
        t.table_coord = static_cast<int>(need_num(jt, "table_coord", "[[system.drift_term]]")) - 1;
        t.table_tau = need_num(jt, "table_tau", "[[system.drift_term]]");
        if (t.table_coord < 0 || t.table_coord >= sys.dim)
          throw ConfigError("[[system.drift_term]] table_coord out of range");
      }
      terms.push_back(std::move(t));
    }
  }
  if (!terms.empty()) {
    sys.H = [terms, d = sys.dim](double, const Segment& eta, Vec& out) {
      for (const Term& t : terms) {
        double v = t.coeff;
        for (const auto& f : t.factors) {
          const double x = eta.eval1(f[1], static_cast<int>(f[0]));
          v *= f[2] == 1.0 ? x : std::pow(x, f[2]);
        }
        if (t.has_table) v *= t.table(eta.eval1(t.table_tau, t.table_coord));
        out[static_cast<std::size_t>(t.coord)] += v;
      }
    };
  }

  struct DiffPoly {
    int coord;
    Vec poly;
  };
  std::vector<DiffPoly> diffs;
  if (const json* arr = maybe(js, "diffusion_term")) {
    if (!arr->is_array()) throw ConfigError("[system] diffusion_term must be a list of tables");
    for (const json& jt : *arr) {
      DiffPoly dp;
      dp.coord = static_cast<int>(need_num(jt, "coord", "[[system.diffusion_term]]")) - 1;
      if (dp.coord < 0 || dp.coord >= sys.dim)
        throw ConfigError("[[system.diffusion_term]] coord out of range");
      dp.poly = need_vec(jt, "poly", "[[system.diffusion_term]]");
      diffs.push_back(std::move(dp));
    }
  }
  if (!diffs.empty()) {
    Vec polys(static_cast<std::size_t>(sys.dim), 0.0);  // marker only
    std::vector<Vec> coeffs(static_cast<std::size_t>(sys.dim));
    for (const DiffPoly& dp : diffs) {
      if (!coeffs[static_cast<std::size_t>(dp.coord)].empty())
        throw ConfigError("[[system.diffusion_term]] duplicate coordinate");
      coeffs[static_cast<std::size_t>(dp.coord)] = dp.poly;
    }
    sys.diffusion.drivers = sys.dim;
    sys.diffusion.diagonal = true;
    sys.diffusion.label = "inline polynomial";
    sys.diffusion.coeff = [coeffs](int i, int j, const Vec& x) {
      if (i != j) return 0.0;
      const Vec& c = coeffs[static_cast<std::size_t>(i)];
      double v = 0.0, p = 1.0;
      for (double ck : c) {
        v += ck * p;
        p *= x[static_cast<std::size_t>(i)];
      }
      return v;
    };
  }
  return sys;
}

// ---------------------------------------------------------------------

struct LoadedSystem {
  BuiltSystem built;            // built.sys always valid
  std::string source;           // builtin name or "inline"
};

LoadedSystem load_system(const json& root, const std::string& section) {
  const json& js = need(root, section, "scenario");
  LoadedSystem ls;
  if (const json* name = maybe(js, "name")) {
    BuiltinParams overrides;
    for (auto it = js.begin(); it != js.end(); ++it) {
      if (it.key() == "name") continue;
      overrides[it.key()] = as_vec(it.value(), "[" + section + "] " + it.key());
    }
    ls.built = make_builtin(name->get<std::string>(), overrides);
    ls.source = name->get<std::string>();
    return ls;
  }
  if (const json* kind = maybe(js, "kind"); kind && kind->get<std::string>() == "inline") {
    ls.built.sys = make_inline_system(js);
    if (const json* beta = maybe(js, "memory_separation_beta"))
      ls.built.sys.metadata["memory_separation_beta"] = beta->get<double>();
    ls.source = "inline";
    return ls;
  }
  throw ConfigError("[" + section + "] needs either 'name = <builtin>' or 'kind = inline'");
}

DomainSpec load_domain(const json& jd) {
  const std::string kind = need_str(jd, "kind", "[domain]");
  if (kind == "orthant") return DomainSpec::orthant(static_cast<int>(need_num(jd, "dim", "[domain]")));
  if (kind == "box") return DomainSpec::box(need_vec(jd, "lo", "[domain]"), need_vec(jd, "hi", "[domain]"));
  if (kind == "ball")
    return DomainSpec::ball(need_vec(jd, "center", "[domain]"), need_num(jd, "radius", "[domain]"));
  if (kind == "polyhedron") {
    const Vec flat = need_vec(jd, "rows", "[domain]");
    const Vec offsets = need_vec(jd, "offsets", "[domain]");
    if (offsets.empty() || flat.size() % offsets.size() != 0)
      throw ConfigError("[domain] rows must hold Q x d values for Q offsets");
    const std::size_t d = flat.size() / offsets.size();
    std::vector<Vec> rows;
    for (std::size_t q = 0; q < offsets.size(); ++q)
      rows.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(q * d),
                        flat.begin() + static_cast<std::ptrdiff_t>((q + 1) * d));
    return DomainSpec::polyhedron(std::move(rows), offsets);
  }
  throw ConfigError("[domain] kind must be orthant|box|polyhedron|ball");
}

std::optional<DomainSpec> load_domain_opt(const json& root, const LoadedSystem& ls) {
  if (const json* jd = maybe(root, "domain")) {
    if (const json* kind = maybe(*jd, "kind"); kind && kind->get<std::string>() == "none")
      return std::nullopt;
    return load_domain(*jd);
  }
  return ls.built.domain;
}

Segment load_initial(const json& run, const SystemSpec& sys, const std::string& key_prefix) {
  const std::string const_key = key_prefix.empty() ? "initial" : key_prefix;
  if (const json* ji = maybe(run, const_key)) {
    Vec v = as_vec(*ji, "[run] " + const_key);
    if (static_cast<int>(v.size()) != sys.dim)
      throw ConfigError("[run] " + const_key + " must have dim entries");
    return Segment::constant(sys.delay, v);
  }
  const std::string samp_key = const_key + "_samples";
  if (const json* js = maybe(run, samp_key)) {
    Vec flat = as_vec(*js, "[run] " + samp_key);
    if (flat.size() % static_cast<std::size_t>(sys.dim) != 0)
      throw ConfigError("[run] " + samp_key + " must hold k*dim values");
    return Segment(sys.delay, sys.dim, std::move(flat));
  }
  throw ConfigError("[run] needs '" + const_key + "' (constant) or '" + samp_key + "'");
}

struct OutputPaths {
  std::filesystem::path dir;
  json spec;

  std::optional<std::filesystem::path> file(const std::string& key) const {
    if (const json* p = maybe(spec, key)) return dir / p->get<std::string>();
    return std::nullopt;
  }
};

OutputPaths load_output(const json& root) {
  OutputPaths out;
  out.spec = root.contains("output") ? root.at("output") : json::object();
  out.dir = out.spec.contains("dir") ? std::filesystem::path(out.spec.at("dir").get<std::string>())
                                     : std::filesystem::path(".");
  std::filesystem::create_directories(out.dir);
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write output file '" + p.string() + "'");
  os << content;
}

void write_report(const OutputPaths& out, const std::string& key, const VerificationReport& rep,
                  std::ostream& log) {
  if (auto p = out.file(key)) write_text(*p, rep.to_json() + "\n");
  log << rep.check << ": " << to_string(rep.status) << "\n";
}

int status_exit(CheckStatus worst) { return worst == CheckStatus::FAIL ? 1 : 0; }

// required tolerances are explicit per action; hidden defaults are not allowed
double need_tol(const json& root, const std::string& key) {
  const json* tols = maybe(root, "tolerances");
  if (!tols) throw ConfigError("scenario needs a [tolerances] section for this action");
  return need_num(*tols, key, "[tolerances]");
}

// ---------------------------------------------------------------------
// actions
// ---------------------------------------------------------------------

struct Common {
  std::uint64_t seed;
  json run;
  OutputPaths out;
  double dt;
  double T;
};

Common common_of(const json& root) {
  Common c{0, json::object(), {}, 0.0, 0.0};
  const json& seed = need(root, "seed", "scenario");
  if (!seed.is_number()) throw ConfigError("'seed' must be a number");
  c.seed = static_cast<std::uint64_t>(seed.get<double>());
  c.run = root.contains("run") ? root.at("run") : json::object();
  c.out = load_output(root);
  c.dt = num_or(c.run, "dt", 1e-3);
  c.T = num_or(c.run, "T", 1.0);
  return c;
}

BrownianPath path_of(const json& root, const Common& c, const SystemSpec& sys,
                     std::uint64_t seed_offset = 0) {
  const json noise = root.contains("noise") ? root.at("noise") : json::object();
  const double path_dt = num_or(noise, "dt", c.dt);
  const double t_minus = num_or(noise, "t_minus", 0.0);
  const double t_plus = num_or(noise, "t_plus", num_or(c.run, "s", 0.0) + c.T);
  const int m = static_cast<int>(num_or(noise, "m", std::max(sys.diffusion.drivers, 1)));
  const std::uint64_t seed = detail::mix4(c.seed, seed_offset, 0x736565647fULL, 2);
  return BrownianPath::sample_window(seed, t_minus, t_plus, path_dt, m);
}

int action_simulate(const json& root, const Common& c, LoadedSystem& ls, std::ostream& log) {
  const double s = num_or(c.run, "s", 0.0);
  const Segment eta = load_initial(c.run, ls.built.sys, "");
  BrownianPath path = path_of(root, c, ls.built.sys);
  const std::string solver = c.run.contains("solver") ? c.run.at("solver").get<std::string>() : "direct";

  SddeRun run;
  if (solver == "direct") {
    run = solve_direct(ls.built.sys, path, s, eta, c.T, c.dt);
  } else if (solver == "conjugated-analytic") {
    run = solve_conjugated(ls.built.sys, path, s, eta, c.T, c.dt, FlowMode::ANALYTIC);
  } else if (solver == "conjugated-numeric") {
    run = solve_conjugated(ls.built.sys, path, s, eta, c.T, c.dt, FlowMode::NUMERIC);
  } else {
    throw ConfigError("[run] solver must be direct|conjugated-analytic|conjugated-numeric");
  }

  if (auto p = c.out.file("trajectory_csv")) {
    std::ofstream os(*p, std::ios::binary);
    export_trajectory_csv(run, os);
  }
  if (auto p = c.out.file("metadata_json"))
    write_text(*p, run_metadata_json(run, c.seed, c.dt, ls.built.sys.metadata) + "\n");
  if (auto p = c.out.file("path_csv")) {
    std::ofstream os(*p, std::ios::binary);
    path.dump_csv(os);
  }
  log << "simulate: " << (run.blowup ? "blow-up at t=" + std::to_string(run.end_time()) : "complete")
      << "\n";
  return 0;
}

int action_check_invariance(const json& root, const Common& c, LoadedSystem& ls, std::ostream& log,
                            bool calibrate) {
  auto dom = load_domain_opt(root, ls);
  if (!dom) throw ConfigError("check-invariance needs a domain");
  InvarianceOptions opts;
  opts.n_paths = static_cast<int>(num_or(c.run, "n_paths", 50));
  opts.n_initials = static_cast<int>(num_or(c.run, "n_initials", 4));
  opts.T = c.T;
  opts.dt_schedule = vec_or(c.run, "dt_schedule", {1e-2, 5e-3, 2.5e-3, 1.25e-3});
  const double coarsest = *std::max_element(opts.dt_schedule.begin(), opts.dt_schedule.end());
  opts.segment_samples = static_cast<int>(num_or(
      c.run, "segment_samples",
      compatible_sample_count(ls.built.sys.delay, coarsest, 6)));
  opts.seed = c.seed;
  opts.viol_tol_coeff = need_tol(root, "viol_tol_coeff");
  opts.viol_tol_order = need_tol(root, "viol_tol_order");
  opts.ratio_min = need_tol(root, "ratio_min");

  if (calibrate) {
    // measure, then suggest a coefficient with 2x headroom
    opts.viol_tol_coeff = 1e300;
    opts.ratio_min = 0.0;
    VerificationReport rep = verify_invariance_mc(ls.built.sys, *dom, opts);
    const Vec& viol = rep.series.at("max_violation");
    const Vec& dts = rep.series.at("dt");
    double coeff = 1e-6;
    for (std::size_t k = 0; k < viol.size(); ++k)
      coeff = std::max(coeff, 2.0 * viol[k] / std::pow(dts[k], opts.viol_tol_order));
    json j;
    j["viol_tol_coeff"] = coeff;
    j["viol_tol_order"] = opts.viol_tol_order;
    j["observed_max_violation"] = viol;
    j["dt"] = dts;
    const auto p = c.out.file("calibration_json").value_or(c.out.dir / "calibration.json");
    write_text(p, detail::dump_canonical(j) + "\n");
    log << "calibrate invariance: viol_tol_coeff = " << coeff << "\n";
    return 0;
  }

  VerificationReport rep = verify_invariance_mc(ls.built.sys, *dom, opts);
  CheckStatus worst = rep.status;

  if (num_or(c.run, "boundary_checks", 0) != 0) {
    NagumoOptions nopts;
    nopts.tol = need_tol(root, "tol_nagumo");
    nopts.seed = c.seed ^ 0x4e61ULL;
    VerificationReport nag =
        check_nagumo(ls.built.sys.H, ls.built.sys.dim, ls.built.sys.delay, *dom, nopts);
    TangencyOptions topts;
    topts.tol = need_tol(root, "tangency_tol");
    topts.seed = c.seed ^ 0x5461ULL;
    VerificationReport tan =
        check_diffusion_tangency(ls.built.sys.drift, ls.built.sys.diffusion, *dom, topts);
    VerificationReport cross = cross_check_invariance(rep, tan, nag, nopts.tol * 10);
    write_report(c.out, "nagumo_json", nag, log);
    write_report(c.out, "tangency_json", tan, log);
    write_report(c.out, "cross_check_json", cross, log);
    worst = std::max({worst, nag.status, tan.status, cross.status},
                     [](CheckStatus a, CheckStatus b) { return static_cast<int>(a) < static_cast<int>(b); });
  }

  write_report(c.out, "report_json", rep, log);
  return status_exit(worst);
}

int action_check_comparison(const json& root, const Common& c, LoadedSystem& ls, std::ostream& log,
                            bool calibrate) {
  LoadedSystem upper = load_system(root, "system_upper");
  auto dom = load_domain_opt(root, ls);
  const Segment eta = load_initial(c.run, ls.built.sys, "");
  const Segment eta_star = load_initial(c.run, upper.built.sys, "initial_upper");
  const int n_seeds = static_cast<int>(num_or(c.run, "n_seeds", 1));

  CompareOptions copts;
  copts.seed = c.seed;
  copts.domain = dom ? &*dom : nullptr;
  copts.dominance_gate = num_or(c.run, "dominance_gate", 0) != 0;
  const double coeff = calibrate ? 0.0 : need_tol(root, "disc_tol_coeff");
  copts.disc_tol = coeff * std::sqrt(c.dt);
  copts.hard_cap_factor = calibrate ? 1e300 : need_tol(root, "hard_cap_factor");

  double worst = 0.0;
  std::vector<std::string> warnings;
  for (int k = 0; k < n_seeds; ++k) {
    BrownianPath path = path_of(root, c, ls.built.sys, static_cast<std::uint64_t>(k));
    OrderedPair pair =
        compare_systems(ls.built.sys, upper.built.sys, eta, eta_star, path, c.T, c.dt, copts);
    worst = std::max(worst, pair.violation);
    for (auto& w : pair.warnings) warnings.push_back(std::move(w));
  }

  if (calibrate) {
    json j;
    j["disc_tol_coeff"] = std::max(2.0 * worst / std::sqrt(c.dt), 1e-6);
    j["observed_max_violation"] = worst;
    j["dt"] = c.dt;
    const auto p = c.out.file("calibration_json").value_or(c.out.dir / "calibration.json");
    write_text(p, detail::dump_canonical(j) + "\n");
    log << "calibrate comparison: disc_tol_coeff = " << j["disc_tol_coeff"].get<double>() << "\n";
    return 0;
  }

  VerificationReport rep;
  rep.check = "comparison";
  rep.tolerances["disc_tol"] = copts.disc_tol;
  rep.tolerances["hard_cap"] = copts.disc_tol * copts.hard_cap_factor;
  rep.statistics["max_violation"] = worst;
  rep.statistics["seeds"] = n_seeds;
  for (const std::string& w : warnings) rep.notes.push_back(w);
  if (!warnings.empty()) rep.set_worst(CheckStatus::WARN);
  if (worst > copts.disc_tol) rep.set_worst(CheckStatus::FAIL);
  write_report(c.out, "report_json", rep, log);
  return status_exit(rep.status);
}

int action_check_quasimonotone(const json& root, const Common& c, LoadedSystem& ls,
                               std::ostream& log) {
  auto dom = load_domain_opt(root, ls);
  if (!dom) throw ConfigError("check-quasimonotone needs a domain (use [domain] kind = box ...)");
  QuasimonotoneOptions opts;
  opts.n_pairs = static_cast<int>(num_or(c.run, "n_pairs", 128));
  opts.seed = c.seed;
  opts.tol = need_tol(root, "qm_tol");
  VerificationReport rep =
      check_quasimonotone(ls.built.sys.H, ls.built.sys.dim, ls.built.sys.delay, *dom, opts);
  const bool expected = ls.built.expect_quasimonotone;
  rep.notes.push_back(std::string("catalog expectation: ") + (expected ? "quasimonotone" : "not quasimonotone"));
  write_report(c.out, "report_json", rep, log);
  return status_exit(rep.status);
}

int action_check_cocycle(const json& root, const Common& c, LoadedSystem& ls, std::ostream& log) {
  const json noise = root.contains("noise") ? root.at("noise") : json::object();
  const double s = num_or(c.run, "s", c.dt * 100);
  const double t = num_or(c.run, "t", c.dt * 100);
  const double t_minus = num_or(noise, "t_minus", 0.0);
  const double t_plus = num_or(noise, "t_plus", s + t + s);
  const int n_etas = static_cast<int>(num_or(c.run, "n_etas", 5));
  const int n_seeds = static_cast<int>(num_or(c.run, "n_seeds", 1));

  auto dom = load_domain_opt(root, ls);
  const int nseg = compatible_sample_count(ls.built.sys.delay, c.dt,
                                           static_cast<int>(num_or(c.run, "segment_samples", 5)));
  CheckStatus worst = CheckStatus::PASS;
  VerificationReport last;
  for (int k = 0; k < n_seeds; ++k) {
    const std::uint64_t seed = detail::mix4(c.seed, static_cast<std::uint64_t>(k), 0x636fULL, 3);
    Cocycle coc(ls.built.sys, seed, t_minus, t_plus, c.dt);
    std::vector<Segment> etas;
    Rng rng(seed ^ 0xe7a5ULL);
    for (int i = 0; i < n_etas; ++i) {
      if (dom) {
        etas.push_back(dom->sample_segment(rng, ls.built.sys.delay, nseg));
      } else {
        std::vector<double> flat(static_cast<std::size_t>(nseg) * ls.built.sys.dim);
        for (double& v : flat) v = rng.uniform(-1.0, 1.0);
        etas.push_back(Segment(ls.built.sys.delay, ls.built.sys.dim, std::move(flat)));
      }
    }
    last = check_cocycle_property(coc, t, s, etas);
    worst = last.status == CheckStatus::FAIL ? CheckStatus::FAIL : worst;

    if (num_or(c.run, "semiflow", 0) != 0) {
      const Segment eta0 = etas.front();
      VerificationReport sf = check_semiflow(ls.built.sys, coc.path(), 0.0, s, s + t, eta0, c.dt);
      worst = sf.status == CheckStatus::FAIL ? CheckStatus::FAIL : worst;
      if (k == 0) write_report(c.out, "semiflow_json", sf, log);
    }
  }
  write_report(c.out, "report_json", last, log);
  return worst == CheckStatus::FAIL ? 1 : 0;
}

int action_pullback(const json& root, const Common& c, LoadedSystem& ls, std::ostream& log) {
  const json noise = root.contains("noise") ? root.at("noise") : json::object();
  const Vec times = vec_or(c.run, "pullback_times", {5, 10, 20, 35, 50});
  const double t_max = *std::max_element(times.begin(), times.end());
  const double t_minus = num_or(noise, "t_minus", t_max);
  const double diam_tol = need_tol(root, "diam_tol");

  const Vec family_flat = vec_or(c.run, "initial_family", {});
  if (family_flat.empty() || family_flat.size() % static_cast<std::size_t>(ls.built.sys.dim) != 0)
    throw ConfigError("[run] initial_family must hold k*dim values (constant segments)");
  std::vector<Segment> family;
  for (std::size_t k = 0; k < family_flat.size(); k += static_cast<std::size_t>(ls.built.sys.dim)) {
    Vec v(family_flat.begin() + static_cast<std::ptrdiff_t>(k),
          family_flat.begin() + static_cast<std::ptrdiff_t>(k + ls.built.sys.dim));
    family.push_back(Segment::constant(ls.built.sys.delay, v));
  }

  const int n_seeds = static_cast<int>(num_or(c.run, "n_seeds", 1));
  int converged = 0;
  std::ostringstream csv;
  CsvWriter w(csv);
  w.header({"seed", "pullback_time", "diameter"});
  AttractorEstimate last;
  for (int k = 0; k < n_seeds; ++k) {
    const std::uint64_t seed = detail::mix4(c.seed, static_cast<std::uint64_t>(k), 0x7062ULL, 4);
    Cocycle coc(ls.built.sys, seed, t_minus, 0.0, c.dt);
    last = pullback_estimate(coc, family, times, diam_tol);
    for (const auto& [t, d] : last.diameter_history)
      w.row({static_cast<double>(k), t, d});
    if (last.converged && last.diameter_history.back().second <= diam_tol) ++converged;
  }
  if (auto p = c.out.file("diameters_csv")) write_text(*p, csv.str());
  if (auto p = c.out.file("envelopes_csv")) {
    std::ofstream os(*p, std::ios::binary);
    CsvWriter w2(os);
    std::vector<std::string> cols{"tau"};
    for (int cc = 0; cc < ls.built.sys.dim; ++cc) cols.push_back("lower_x" + std::to_string(cc + 1));
    for (int cc = 0; cc < ls.built.sys.dim; ++cc) cols.push_back("upper_x" + std::to_string(cc + 1));
    w2.header(cols);
    const Segment& lo = last.lower_env;
    const Segment& hi = last.upper_env;
    for (int k = 0; k < lo.sample_count(); ++k) {
      std::vector<double> row{-lo.delay() + k * lo.sample_spacing()};
      for (int cc = 0; cc < lo.dim(); ++cc) row.push_back(lo.sample(k, cc));
      for (int cc = 0; cc < hi.dim(); ++cc) row.push_back(hi.sample(k, cc));
      w2.row(row);
    }
  }

  VerificationReport rep;
  rep.check = "pullback";
  rep.tolerances["diam_tol"] = diam_tol;
  rep.statistics["seeds"] = n_seeds;
  rep.statistics["seeds_converged"] = converged;
  rep.statistics["final_diameter_last_seed"] = last.diameter_history.back().second;
  const double required = num_or(c.run, "converged_fraction", 0.0);
  if (static_cast<double>(converged) < required * n_seeds) rep.set_worst(CheckStatus::FAIL);
  write_report(c.out, "report_json", rep, log);
  return status_exit(rep.status);
}

int action_equilibrium(const json& root, const Common& c, LoadedSystem& ls, std::ostream& log) {
  if (!ls.built.biochem)
    throw ConfigError("equilibrium action needs the 'biochem' builtin system");
  const BiochemParams& bp = *ls.built.biochem;
  const json noise = root.contains("noise") ? root.at("noise") : json::object();
  const double T_trunc = num_or(c.run, "T_trunc", 40.0 / *std::min_element(bp.alpha.begin(), bp.alpha.end()));
  const double t_minus = num_or(noise, "t_minus", T_trunc + 2.0 * bp.delay + bp.dim() * bp.delay);
  const double quad_tol = need_tol(root, "quad_tol");
  const double t_plus = num_or(noise, "t_plus", num_or(c.run, "t", 0.0) + bp.delay);

  const std::uint64_t seed = detail::mix4(c.seed, 0, 0x6571ULL, 5);
  BrownianPath path = BrownianPath::sample_window(seed, t_minus, std::max(t_plus, c.dt), c.dt,
                                                  std::max(bp.dim(), 1));
  EquilibriumTable table = biochem_equilibrium_table(bp, path, T_trunc, c.dt, quad_tol);

  json j;
  Vec v0(static_cast<std::size_t>(bp.dim()));
  for (int i = 0; i < bp.dim(); ++i) v0[static_cast<std::size_t>(i)] = table.value(path.origin(), i);
  j["equilibrium_at_zero"] = v0;
  j["tail_estimate"] = table.tail_estimate();
  j["T_trunc"] = T_trunc;
  j["dt"] = c.dt;
  j["quad_tol"] = quad_tol;
  if (auto p = c.out.file("equilibrium_json")) write_text(*p, detail::dump_canonical(j) + "\n");

  CheckStatus worst = CheckStatus::PASS;
  if (const json* lam = maybe(c.run, "lambda")) {
    const double lambda = lam->get<double>();
    const double t = need_num(c.run, "t", "[run] (super-equilibrium check)");
    const double disc_tol = need_tol(root, "disc_tol_coeff") * std::sqrt(c.dt);
    Cocycle coc(ls.built.sys, seed, t_minus, std::max(t_plus, t + bp.delay), c.dt);
    VerificationReport rep = check_super_equilibrium(coc, table, lambda, t, disc_tol);
    write_report(c.out, "report_json", rep, log);
    worst = rep.status;
  }
  log << "equilibrium: tail estimate " << table.tail_estimate() << "\n";
  return worst == CheckStatus::FAIL ? 1 : 0;
}

int action_envelope(const json& root, const Common& c, LoadedSystem& ls, std::ostream& log,
                    bool calibrate) {
  if (!ls.built.lv) throw ConfigError("envelope action needs the 'lv-box' builtin system");
  const LotkaVolterraParams& lv = *ls.built.lv;
  const Segment eta = load_initial(c.run, ls.built.sys, "");
  const int n_seeds = static_cast<int>(num_or(c.run, "n_seeds", 1));

  double worst = 0.0;
  EnvelopeResult last;
  for (int k = 0; k < n_seeds; ++k) {
    BrownianPath path = path_of(root, c, ls.built.sys, static_cast<std::uint64_t>(k));
    last = lotka_volterra_envelope(lv, eta, path, c.T, c.dt);
    worst = std::max({worst, last.violation_lower, last.violation_upper});
  }

  if (calibrate) {
    json j;
    j["disc_tol_coeff"] = std::max(2.0 * worst / std::sqrt(c.dt), 1e-6);
    j["observed_max_violation"] = worst;
    j["dt"] = c.dt;
    const auto p = c.out.file("calibration_json").value_or(c.out.dir / "calibration.json");
    write_text(p, detail::dump_canonical(j) + "\n");
    log << "calibrate envelope: disc_tol_coeff = " << j["disc_tol_coeff"].get<double>() << "\n";
    return 0;
  }

  const double disc_tol = need_tol(root, "disc_tol_coeff") * std::sqrt(c.dt);
  const double cap = need_tol(root, "hard_cap_factor") * disc_tol;

  if (auto p = c.out.file("lower_csv")) {
    std::ofstream os(*p, std::ios::binary);
    export_trajectory_csv(last.lower, os);
  }
  if (auto p = c.out.file("mid_csv")) {
    std::ofstream os(*p, std::ios::binary);
    export_trajectory_csv(last.mid, os);
  }
  if (auto p = c.out.file("upper_csv")) {
    std::ofstream os(*p, std::ios::binary);
    export_trajectory_csv(last.upper, os);
  }
  if (auto p = c.out.file("violations_csv")) {
    std::ofstream os(*p, std::ios::binary);
    CsvWriter w(os);
    w.header({"time", "lower_violation", "upper_violation"});
    const Trajectory& mid = last.mid.trajectory;
    for (std::int64_t node = 0; node <= mid.grid().n_steps; ++node) {
      double lo = 0.0, hi = 0.0;
      for (int cc = 0; cc < mid.dim(); ++cc) {
        lo = std::max(lo, last.lower.trajectory.value(node, cc) - mid.value(node, cc));
        hi = std::max(hi, mid.value(node, cc) - last.upper.trajectory.value(node, cc));
      }
      w.row({mid.grid().time(node), lo, hi});
    }
  }

  VerificationReport rep;
  rep.check = "envelope";
  rep.tolerances["disc_tol"] = disc_tol;
  rep.tolerances["hard_cap"] = cap;
  rep.statistics["max_violation"] = worst;
  rep.statistics["seeds"] = n_seeds;
  if (worst > disc_tol) rep.set_worst(CheckStatus::FAIL);
  write_report(c.out, "report_json", rep, log);
  return status_exit(rep.status);
}

int dispatch(const json& root, std::ostream& log, bool calibrate) {
  const std::string action = need_str(root, "action", "scenario");
  Common c = common_of(root);
  LoadedSystem ls = load_system(root, "system");

  if (action == "simulate") return action_simulate(root, c, ls, log);
  if (action == "check-invariance") return action_check_invariance(root, c, ls, log, calibrate);
  if (action == "check-comparison") return action_check_comparison(root, c, ls, log, calibrate);
  if (action == "check-quasimonotone") return action_check_quasimonotone(root, c, ls, log);
  if (action == "check-cocycle") return action_check_cocycle(root, c, ls, log);
  if (action == "pullback") return action_pullback(root, c, ls, log);
  if (action == "equilibrium") return action_equilibrium(root, c, ls, log);
  if (action == "envelope") return action_envelope(root, c, ls, log, calibrate);
  throw ConfigError("unknown action '" + action + "'");
}

}  // namespace

int run_scenario_file(const std::string& file, std::ostream& log) {
  try {
    return dispatch(load_scenario(file), log, false);
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

int calibrate_scenario_file(const std::string& file, std::ostream& log) {
  try {
    return dispatch(load_scenario(file), log, true);
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sdde
