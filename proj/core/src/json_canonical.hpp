#pragma once

// Private helper shared by the .cpp files; not installed.

#include <ostream>
#include <string>

#include "json.hpp"

namespace sdde::detail {

void dump_canonical(const nlohmann::json& j, std::ostream& os);
std::string dump_canonical(const nlohmann::json& j);

}  // namespace sdde::detail
