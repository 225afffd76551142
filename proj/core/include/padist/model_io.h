#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "padist/cnn.h"
#include "padist/training.h"

namespace padist::ml {

nlohmann::json arch_to_json(const CNNArch& arch);
CNNArch arch_from_json(const nlohmann::json& j);

// Writes <path> (JSON descriptor with the layer shape table) and
// <path minus extension>.weights (binary container).
void save_model(const CNNModel& model, const std::filesystem::path& json_path);
// Validates the stored shape table against the architecture.
CNNModel load_model(const std::filesystem::path& json_path);

// Model plus Adam state; config_hash is checked again on load.
void save_checkpoint(const TrainerState& st, const std::filesystem::path& json_path,
                     const std::string& config_hash);
TrainerState load_checkpoint(const std::filesystem::path& json_path,
                             const std::string& expected_config_hash);

}  // namespace padist::ml
