#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace radpair::io {

std::vector<std::string> preset_names();

// Config fragment for a named preset; unknown names throw ValidationError.
const nlohmann::json& preset(std::string_view name);

}  // namespace radpair::io
