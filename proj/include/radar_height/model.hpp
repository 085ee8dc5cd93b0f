#pragma once

// Dual-encoder, two-head height estimation network.
//
//   visual (3,H,W) --encoder--> P_C (F,H,W) --+
//                                             +-- concat (2F,H,W) --+-- 1x1 -> softplus -> height (H,W)
//   radar  (4,H,W) --encoder--> P_R (F,H,W) --+                     +-- 1x1 -> sigmoid  -> seg (2,H,W)
//
// Each encoder is three 3x3 convolutions (stride 1, 2, 2) with ReLU, decoded
// FPN-style: 1x1 laterals on every level, bilinear upsampling to full
// resolution, summed, then ReLU.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "radar_height/ground_truth.hpp"
#include "radar_height/loss.hpp"
#include "radar_height/nn.hpp"
#include "radar_height/radar_image.hpp"
#include "radar_height/tensor.hpp"

namespace radar_height {

struct ModelShape {
  int rows = 64;
  int cols = 96;
  int visual_channels = 3;
  int radar_channels = 4;
  int c1 = 8;
  int c2 = 16;
  int c3 = 32;
  int features = 16;  // per-encoder decoded channels

  bool operator==(const ModelShape&) const = default;
};

struct EncoderLayers {
  nn::Conv2d conv1, conv2, conv3;
  nn::Conv2d lateral1, lateral2, lateral3;
};

struct NamedLayer {
  std::string name;
  nn::Conv2d layer;
  bool is_head = false;
};

struct ModelLayout {
  ModelShape shape;
  EncoderLayers camera;
  EncoderLayers radar;
  nn::Conv2d height_head;
  nn::Conv2d seg_head;
  std::size_t total = 0;

  static ModelLayout make(const ModelShape& shape);
  std::vector<NamedLayer> layers() const;
};

/// All weights in one flat vector; the layout says where each layer lives.
struct ToyModelParams {
  ModelShape shape;
  std::vector<double> values;

  ModelLayout layout() const { return ModelLayout::make(shape); }
  bool operator==(const ToyModelParams&) const = default;
};

/// Fan-in scaled uniform init for hidden layers; both heads start at zero.
ToyModelParams init_params(const ModelShape& shape, std::uint64_t seed);

struct ModelInput {
  Tensor visual;  // (3, H, W), values in [0, 1]
  Tensor radar;   // (4, H, W), scaled radar channels
};

/// Fixed channel scaling applied to radar images before they enter the network.
Tensor radar_input_tensor(const RadarImage& img);

struct Prediction {
  HeightMap height;
  SegMask seg;
};

void check_input(const ModelShape& shape, const ModelInput& input);

Prediction forward(const ToyModelParams& params, const ModelInput& input);

struct Targets {
  const HeightMap* heights = nullptr;
  const RegionPartition* partition = nullptr;
  const SegMask* mask = nullptr;
};

struct ObjectiveOptions {
  LossSpec loss;
  double seg_weight = 1.0;
  bool use_seg = true;
};

struct LossBreakdown {
  RegionLosses reg;
  double seg = 0.0;
  double total = 0.0;
};

/// Loss of one sample under the objective, without gradients.
LossBreakdown evaluate_loss(const ToyModelParams& params, const ModelInput& input, const Targets& targets,
                            const ObjectiveOptions& objective);

/// Gradient of total_loss for one sample w.r.t. every parameter, accumulated into `grad`
/// (which must be params.values.size() long).
LossBreakdown backward(const ToyModelParams& params, const ModelInput& input, const Targets& targets,
                       const ObjectiveOptions& objective, std::span<double> grad);

}  // namespace radar_height
