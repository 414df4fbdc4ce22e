#pragma once

#include <string>
#include <vector>

namespace fmadj::app {

std::vector<std::string> preset_names();
bool has_preset(const std::string& name);
// YAML text of a bundled preset; throws ConfigError for unknown names.
const std::string& preset_yaml(const std::string& name);

}  // namespace fmadj::app
