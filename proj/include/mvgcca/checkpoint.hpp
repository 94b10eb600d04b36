#ifndef MVGCCA_CHECKPOINT_HPP
#define MVGCCA_CHECKPOINT_HPP

#include "mvgcca/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace mvgcca {

/// TrainConfig <-> JSON (field names match the CLI flags where one exists).
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
};

/// Self-describing binary container (MessagePack): format tag, version,
/// training config, view dimensions, and every parameter tensor under its
/// stable name.
void save_checkpoint(const std::filesystem::path& file, const ModelParams& params,
                     const TrainConfig& cfg);
Checkpoint load_checkpoint(const std::filesystem::path& file);

} // namespace mvgcca

#endif
