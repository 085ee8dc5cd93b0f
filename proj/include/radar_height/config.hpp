#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "radar_height/radar_image.hpp"
#include "radar_height/synth.hpp"
#include "radar_height/trainer.hpp"

namespace radar_height {

/// One experiment: scene generation, training, extension and output location.
/// The top-level seed drives both scene generation and training.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  SceneSpec scene;
  TrainConfig train;
  ExtensionSpec extension;
  std::array<double, 3> split_ratios{3.0, 1.0, 1.0};
  std::string out_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Propagates the seed and camera dims into the scene and train sections, then validates.
void finalize(ExperimentConfig& cfg);

nlohmann::json to_json(const LossSpec& spec);
nlohmann::json to_json(const SceneSpec& spec);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const ExtensionSpec& spec);
nlohmann::json to_json(const ModelShape& shape);
nlohmann::json to_json(const CameraModel& cam);
/// Canonical form; excludes out_dir, which does not influence any artifact.
nlohmann::json to_json(const ExperimentConfig& cfg);

// Parsers overlay the JSON onto the given defaults. Unknown keys and type
// mismatches throw ConfigError naming the offending key.
void from_json(const nlohmann::json& j, LossSpec& spec);
void from_json(const nlohmann::json& j, SceneSpec& spec);
void from_json(const nlohmann::json& j, TrainConfig& cfg);
void from_json(const nlohmann::json& j, ExtensionSpec& spec);
void from_json(const nlohmann::json& j, ModelShape& shape);
void from_json(const nlohmann::json& j, CameraModel& cam);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

ExperimentConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the JSON's compact dump, as 16 hex digits.
std::string hash_json(const nlohmann::json& j);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace radar_height
