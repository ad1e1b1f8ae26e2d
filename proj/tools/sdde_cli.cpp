// Scenario-driven front end: run solves and property checks from a scenario
// file, list the builtin system catalog, or calibrate scenario tolerances.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sdde/builtins.hpp"
#include "sdde/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sdde - stochastic delay differential equation toolkit"};
  app.require_subcommand(1);

  std::string scenario_file;
  CLI::App* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("file", scenario_file, "scenario file (text or JSON)")->required();

  bool as_json = false;
  CLI::App* list = app.add_subcommand("list", "list builtin systems and their parameters");
  list->add_flag("--json", as_json, "machine-readable output");

  std::string calibrate_file;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "measure and store scenario tolerance constants");
  calibrate->add_option("file", calibrate_file, "scenario file (text or JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return sdde::run_scenario_file(scenario_file, std::cout);
  if (calibrate->parsed()) return sdde::calibrate_scenario_file(calibrate_file, std::cout);
  if (list->parsed()) {
    std::cout << (as_json ? sdde::list_builtins_json() + "\n" : sdde::list_builtins_text());
    return 0;
  }
  return 2;
}
