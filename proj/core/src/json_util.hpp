#pragma once

#include <json.hpp>

#include <string>

namespace mcf {

using Json = nlohmann::ordered_json;

/// Two-space indented dump with %.17g floats; non-finite values become null.
std::string dump_json(const Json& j);

}  // namespace mcf
