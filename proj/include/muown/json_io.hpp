#pragma once

#include "muown/optimizers.hpp"

#include <json.hpp>

namespace muown {

nlohmann::json to_json(const HyperParams &hp);
// Missing keys keep their defaults. Throws ConfigError naming the field
// (prefixed with `path`) on type or range errors.
HyperParams hyperparams_from_json(const nlohmann::json &j, const std::string &path = "optimizer");

} // namespace muown
