#pragma once

// Versioned JSON containers for datasets, prediction stores, checkpoints and
// reports. Doubles are written in shortest round-trip decimal form, so a
// load of a save reproduces every value bit for bit.

#include <string>
#include <vector>

#include <json.hpp>

#include "radar_height/config.hpp"
#include "radar_height/metrics.hpp"
#include "radar_height/prediction_store.hpp"
#include "radar_height/synth.hpp"
#include "radar_height/trainer.hpp"

namespace radar_height {

inline constexpr int kSchemaVersion = 1;

struct Dataset {
  CameraModel camera;
  std::vector<Frame> frames;
  Split split;
  std::string generator_hash;

  const Frame* find_frame(int id) const;
  /// Frames of one split part, in split order.
  std::vector<Frame> select(const std::vector<int>& ids) const;
  bool operator==(const Dataset&) const = default;
};

struct Checkpoint {
  ToyModelParams params;
  TrainConfig config;
  std::string config_hash;
  bool operator==(const Checkpoint&) const = default;
};

nlohmann::json dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const nlohmann::json& j);

void save_dataset(const std::string& path, const Dataset& d);
Dataset load_dataset(const std::string& path);

void save_predictions(const std::string& path, const PredictionStore& store, const std::string& config_hash);
PredictionStore load_predictions(const std::string& path);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json to_json(const HeightErrorReport& r);
nlohmann::json to_json(const HeightSummary& s);
nlohmann::json to_json(const DepthErrorReport& r);
nlohmann::json to_json(const EpochRecord& r);

/// Writes text atomically enough for our purposes (whole-file replace); throws IoError.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Parses JSON, reporting the byte offset of a syntax error in a FormatError.
nlohmann::json parse_json(const std::string& text, const std::string& source);

}  // namespace radar_height
