#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sdde/builtins.hpp"
#include "sdde/scenario.hpp"

using namespace sdde;
namespace fs = std::filesystem;

namespace {

std::string scenario(const char* name) {
  return std::string(SDDE_SCENARIO_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run_quiet(const std::string& file) {
  std::ostringstream log;
  const int code = run_scenario_file(file, log);
  INFO(log.str());
  return code;
}

}  // namespace

TEST_CASE("frozen simulate scenario writes a constant trajectory") {
  CHECK(run_quiet(scenario("frozen_simulate.scn")) == 0);
  const std::string csv = slurp("out_frozen/traj.csv");
  CHECK(csv.rfind("time,x1", 0) == 0);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  int rows = 0;
  while (std::getline(is, line)) {
    CHECK(line.substr(line.find(',') + 1) == "2.5");
    ++rows;
  }
  CHECK(rows == 151);  // history 50 nodes + 100 steps + endpoint
  const std::string meta = slurp("out_frozen/meta.json");
  CHECK(meta.find("\"blowup\":false") != std::string::npos);
}

TEST_CASE("scenario validation failures exit with code 2") {
  CHECK(run_quiet(scenario("missing_seed.scn")) == 2);

  // unknown builtin parameter
  const fs::path bad = fs::path("bad_param.scn");
  std::ofstream(bad) << "seed = 1\naction = simulate\n[system]\nname = gbm\nnot_a_param = 3\n"
                        "[run]\nT = 0.1\ndt = 0.01\ninitial = 1\n";
  CHECK(run_quiet(bad.string()) == 2);

  const fs::path badact = fs::path("bad_action.scn");
  std::ofstream(badact) << "seed = 1\naction = dance\n[system]\nname = gbm\n";
  CHECK(run_quiet(badact.string()) == 2);

  const fs::path badsyn = fs::path("bad_syntax.scn");
  std::ofstream(badsyn) << "seed = 1\nthis line has no equals sign\n";
  CHECK(run_quiet(badsyn.string()) == 2);
}

TEST_CASE("lv-box invariance scenario passes, also at the tight box") {
  CHECK(run_quiet(scenario("lv_box_invariance.scn")) == 0);
  const std::string report = slurp("out_lv_box/report.json");
  CHECK(report.find("\"status\":\"PASS\"") != std::string::npos);

  CHECK(run_quiet(scenario("lv_box_tight.scn")) == 0);
  CHECK(slurp("out_lv_tight/report.json").find("\"status\":\"PASS\"") != std::string::npos);
}

TEST_CASE("comparison scenario: dominated feedback stays ordered") {
  CHECK(run_quiet(scenario("comparison_linear.scn")) == 0);
  CHECK(slurp("out_compare/report.json").find("\"status\":\"PASS\"") != std::string::npos);
}

TEST_CASE("envelope scenario passes and calibrates") {
  CHECK(run_quiet(scenario("envelope_lv.scn")) == 0);
  const std::string report = slurp("out_envelope/report.json");
  CHECK(report.find("\"check\":\"envelope\"") != std::string::npos);

  std::ostringstream log;
  CHECK(calibrate_scenario_file(scenario("envelope_lv.scn"), log) == 0);
  const std::string cal = slurp("out_envelope/calibration.json");
  CHECK(cal.find("disc_tol_coeff") != std::string::npos);
}

TEST_CASE("cocycle scenario reports bitwise identity") {
  CHECK(run_quiet(scenario("cocycle_biochem.scn")) == 0);
  const std::string rep = slurp("out_cocycle/report.json");
  CHECK(rep.find("\"max_deviation\":0") != std::string::npos);
  CHECK(slurp("out_cocycle/semiflow.json").find("\"status\":\"PASS\"") != std::string::npos);
}

TEST_CASE("pullback scenario converges") {
  CHECK(run_quiet(scenario("pullback_scalar.scn")) == 0);
  CHECK(slurp("out_pullback/report.json").find("\"status\":\"PASS\"") != std::string::npos);
  CHECK(slurp("out_pullback/diameters.csv").rfind("seed,pullback_time,diameter", 0) == 0);
}

TEST_CASE("equilibrium scenario writes the vector and super-equilibrium report") {
  CHECK(run_quiet(scenario("equilibrium_biochem.scn")) == 0);
  const std::string eq = slurp("out_equilibrium/equilibrium.json");
  CHECK(eq.find("equilibrium_at_zero") != std::string::npos);
  CHECK(slurp("out_equilibrium/report.json").find("\"check\":\"super_equilibrium\"") !=
        std::string::npos);
}

TEST_CASE("inline polynomial system runs") {
  CHECK(run_quiet(scenario("inline_poly.scn")) == 0);
  CHECK(slurp("out_inline/traj.csv").rfind("time,x1", 0) == 0);
}

TEST_CASE("JSON scenario encoding is accepted") {
  CHECK(run_quiet(scenario("quasimonotone.json")) == 0);
  CHECK(slurp("out_qm_json/report.json").find("\"status\":\"PASS\"") != std::string::npos);
}

TEST_CASE("scenario re-runs are byte-identical") {
  for (const char* name : {"frozen_simulate.scn", "lv_box_invariance.scn"}) {
    REQUIRE(run_quiet(scenario(name)) == 0);
    const fs::path dir = name[0] == 'f' ? "out_frozen" : "out_lv_box";
    std::map<fs::path, std::string> first;
    for (const auto& e : fs::directory_iterator(dir)) first[e.path()] = slurp(e.path());
    REQUIRE(run_quiet(scenario(name)) == 0);
    for (const auto& [p, content] : first) CHECK(slurp(p) == content);
  }
}

TEST_CASE("builtin catalog listing is stable and sorted") {
  const std::string text = list_builtins_text();
  CHECK(text.find("biochem") != std::string::npos);
  CHECK(text.find("lv-simplex") != std::string::npos);
  const std::string js = list_builtins_json();
  CHECK(js.find("\"biochem\"") != std::string::npos);
  CHECK(list_builtins_text() == text);
  CHECK(js.rfind("{\"biochem\"", 0) == 0);  // sorted keys put biochem first
}
