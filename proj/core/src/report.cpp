#include "sdde/report.hpp"

#include <sstream>

#include "json_canonical.hpp"
#include "sdde/io.hpp"

namespace sdde {

using json = nlohmann::json;

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::PASS: return "PASS";
    case CheckStatus::WARN: return "WARN";
    case CheckStatus::FAIL: return "FAIL";
  }
  return "?";
}

namespace detail {

// nlohmann's default object storage is a std::map, so iteration is already
// key-sorted; this writer only pins the number format to 17 digits.
void dump_canonical(const json& j, std::ostream& os) {
  switch (j.type()) {
    case json::value_t::object: {
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        os << json(it.key()).dump() << ':';
        dump_canonical(it.value(), os);
      }
      os << '}';
      break;
    }
    case json::value_t::array: {
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',';
        dump_canonical(j[i], os);
      }
      os << ']';
      break;
    }
    case json::value_t::number_float:
      os << format17(j.get<double>());
      break;
    default:
      os << j.dump();
      break;
  }
}

std::string dump_canonical(const json& j) {
  std::ostringstream os;
  dump_canonical(j, os);
  return os.str();
}

}  // namespace detail

std::string VerificationReport::to_json() const {
  json j;
  j["check"] = check;
  j["status"] = to_string(status);
  j["tolerances"] = json::object();
  for (const auto& [k, v] : tolerances) j["tolerances"][k] = v;
  j["statistics"] = json::object();
  for (const auto& [k, v] : statistics) j["statistics"][k] = v;
  j["series"] = json::object();
  for (const auto& [k, v] : series) j["series"][k] = v;
  j["counterexamples"] = json::array();
  for (const auto& c : counterexamples) {
    json jc;
    jc["description"] = c.description;
    jc["value"] = c.value;
    jc["inputs"] = json::object();
    for (const auto& [k, v] : c.inputs) jc["inputs"][k] = v;
    j["counterexamples"].push_back(jc);
  }
  j["notes"] = notes;
  return detail::dump_canonical(j);
}

}  // namespace sdde
