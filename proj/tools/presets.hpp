#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fbstefan::cli {

struct Preset {
    std::string name;
    std::string description;
    nlohmann::json doc;
};

const std::vector<Preset>& presets();

/// nullptr when no preset has that name.
const Preset* find_preset(const std::string& name);

}  // namespace fbstefan::cli
