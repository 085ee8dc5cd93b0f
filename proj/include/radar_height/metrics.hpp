#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "radar_height/ground_truth.hpp"
#include "radar_height/radar_image.hpp"

namespace radar_height {

/// Height errors of one frame. A metric whose support set is empty is absent.
struct HeightErrorReport {
  std::optional<double> rhe;          // mean |H - H^| over RAD pixels
  std::optional<double> bhe;          // mean |H - H^| over all pixels
  std::optional<double> rhe_nonzero;  // RAD pixels with H != 0
  std::optional<double> rhe_zero;     // RAD pixels with H == 0
  int radar_pixels = 0;
  int nonzero_pixels = 0;

  bool operator==(const HeightErrorReport&) const = default;
};

HeightErrorReport height_errors(const HeightMap& gt, const HeightMap& pred, const RegionPartition& part);

/// RHE family for an extension method: each RAD pixel is scored with the
/// extension height of the point that owns it, 0 for points that were removed.
/// BHE is absent (an extension defines heights at radar pixels only).
HeightErrorReport radar_point_errors(const Frame& frame, const GroundTruth& gt,
                                     const std::vector<PointHeight>& heights);

struct DepthErrorReport {
  double mae = 0.0;
  double rmse = 0.0;
  double absrel = 0.0;
  std::array<double, 3> delta{};  // delta_1..3
  long long count = 0;
};

/// Depth-completion metrics over the pixels where `valid` is nonzero.
/// Throws std::invalid_argument for an empty valid set or non-positive ground truth in it.
DepthErrorReport depth_errors(const Grid<double>& pred, const Grid<double>& gt, const Grid<std::uint8_t>& valid);

struct HeightSummary {
  std::optional<double> rhe, bhe, rhe_nonzero, rhe_zero;
  int frames = 0;
  int rhe_frames = 0;
  int bhe_frames = 0;
  int rhe_nonzero_frames = 0;
  int rhe_zero_frames = 0;
};

/// Unweighted mean over frames per metric; frames lacking a metric are skipped for it.
HeightSummary dataset_aggregate(const std::vector<HeightErrorReport>& frames);

}  // namespace radar_height
