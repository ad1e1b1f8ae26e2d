#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdde/domains.hpp"
#include "sdde/order.hpp"
#include "sdde/rds.hpp"
#include "sdde/solver.hpp"

namespace sdde {

/// Parameter bag for catalog factories: every value is a vector of reals
/// (size 1 for scalars). Unknown keys are rejected.
using BuiltinParams = std::map<std::string, Vec>;

/// A constructed catalog system with its natural domain and the metadata the
/// checkers care about.
struct BuiltSystem {
  SystemSpec sys;
  std::optional<DomainSpec> domain;
  bool expect_quasimonotone = false;
  std::optional<LotkaVolterraParams> lv;       // set for "lv-box"
  std::optional<BiochemParams> biochem;        // set for "biochem"
};

struct ParamDoc {
  std::string name;
  std::string doc;
  Vec default_value;
};

struct BuiltinEntry {
  std::string name;
  std::string summary;
  std::string domain_doc;
  std::vector<ParamDoc> params;
  BuiltSystem (*make)(const BuiltinParams&);
};

/// The catalog, sorted by name.
const std::vector<BuiltinEntry>& builtin_catalog();

const BuiltinEntry* find_builtin(const std::string& name);

/// Build a catalog system with defaults overridden by `overrides`.
BuiltSystem make_builtin(const std::string& name, const BuiltinParams& overrides = {});

/// Stable sorted text table / canonical JSON of the catalog.
std::string list_builtins_text();
std::string list_builtins_json();

}  // namespace sdde
