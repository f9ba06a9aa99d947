#pragma once

#include <string>

#include "superrl/trainer.hpp"

namespace superrl {

/// One JSON document is the single source of truth for a run: a TrainConfig
/// mirror plus the output directory. Unknown keys are rejected.
struct CliConfig {
    TrainConfig train;
    std::string out_dir = "runs/default";
};

CliConfig config_from_json_text(const std::string& text);
CliConfig load_config_file(const std::string& path);

/// Serialization of a config; with defaults it backs the `defaults` command.
std::string config_to_json_text(const CliConfig& config);

}  // namespace superrl
