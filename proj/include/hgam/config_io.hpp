#pragma once

#include "hgam/training.hpp"
#include "hgam/world.hpp"

#include <json.hpp>

#include <filesystem>

namespace hgam {

// Config files are flat JSON objects keyed by field name. Absent keys keep
// their defaults; unknown keys and wrongly typed values raise ConfigError.

nlohmann::json to_json(const WorldConfig& config);
nlohmann::json to_json(const TrainConfig& config);

WorldConfig world_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);

WorldConfig load_world_config(const std::filesystem::path& path);
TrainConfig load_train_config(const std::filesystem::path& path);

}  // namespace hgam
