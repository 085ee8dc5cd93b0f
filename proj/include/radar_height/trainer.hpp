#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "radar_height/metrics.hpp"
#include "radar_height/model.hpp"
#include "radar_height/prediction_store.hpp"

namespace radar_height {

struct TrainConfig {
  LossSpec loss;
  double lr = 3e-4;
  double lr_decay = 0.75;
  int plateau_patience = 3;
  int epochs = 30;
  int batch_size = 8;
  std::uint64_t seed = 1;
  ModelShape shape;
  double seg_weight = 1.0;
  bool use_seg = true;
  int threads = 1;  // >1 computes batch items in parallel; results are identical

  bool operator==(const TrainConfig&) const = default;
};

/// Throws ConfigError on out-of-range fields.
void validate(const TrainConfig& cfg);

/// Everything the model consumes and is scored against for one frame.
struct Sample {
  int frame_id = 0;
  ModelInput input;
  GroundTruth gt;
  SegMask mask;
};

/// Visual raster, plain pixel-projected radar image, ground truth and mask.
Sample make_sample(const Frame& frame);
std::vector<Sample> make_samples(const std::vector<Frame>& frames);

struct LossMeans {
  double l_bg = 0.0;
  double l_fg = 0.0;
  double l_rad = 0.0;
  double l_reg = 0.0;
  double seg = 0.0;
  double total = 0.0;
};

struct EpochRecord {
  int epoch = 0;  // 0 = before the first update
  double lr = 0.0;
  std::optional<LossMeans> train;
  LossMeans val;
};

struct TrainResult {
  ToyModelParams params;
  std::vector<EpochRecord> log;
};

ObjectiveOptions objective_of(const TrainConfig& cfg);

LossMeans mean_loss(const ToyModelParams& params, const std::vector<Sample>& samples, const ObjectiveOptions& objective);

/// Adam with plateau decay: when validation l_reg has not improved for
/// plateau_patience epochs, lr is multiplied by lr_decay.
TrainResult train(const TrainConfig& cfg, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Predicted height at the pixel of every in-image radar point of each frame.
PredictionStore predict_dataset(const ToyModelParams& params, const std::vector<Sample>& samples,
                                const std::vector<Frame>& frames);

/// Ground-truth heights in place of predictions (an ideal predictor).
PredictionStore oracle_predictions(const std::vector<Frame>& frames);

std::vector<HeightErrorReport> evaluate_height(const ToyModelParams& params, const std::vector<Sample>& samples);

/// Pooled mean |H^| at RAD pixels against the mean object height; a ratio near
/// zero means the model collapsed to all-zero output.
struct CollapseStats {
  double mean_pred_at_radar = 0.0;
  double mean_object_height = 0.0;
  double ratio = 0.0;
};

CollapseStats collapse_stats(const ToyModelParams& params, const std::vector<Sample>& samples,
                             const std::vector<Frame>& frames);

}  // namespace radar_height
