#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace sidnn {

std::vector<std::string> preset_names();

/// Full experiment configuration of a bundled preset. Glassfurnace presets
/// read the file named by SIDNN_GLASSFURNACE, else data/glassfurnace.dat.
nlohmann::json preset_config(const std::string& name);

}  // namespace sidnn
