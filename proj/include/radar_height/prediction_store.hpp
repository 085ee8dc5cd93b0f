#pragma once

#include <map>
#include <optional>
#include <vector>

#include "radar_height/geometry.hpp"

namespace radar_height {

/// Predicted height at the pixel of one projected radar point.
struct PointPrediction {
  int point_id = 0;
  Pixel pixel;
  double height = 0.0;
  bool operator==(const PointPrediction&) const = default;
};

/// Per-frame predicted radar point heights, keyed by frame id then point id order.
class PredictionStore {
 public:
  void put(int frame_id, std::vector<PointPrediction> points);

  /// Absent when the frame was never predicted.
  std::optional<std::vector<PointPrediction>> find(int frame_id) const;

  bool contains(int frame_id) const { return frames_.count(frame_id) > 0; }
  const std::map<int, std::vector<PointPrediction>>& frames() const { return frames_; }
  std::size_t size() const { return frames_.size(); }

  bool operator==(const PredictionStore&) const = default;

 private:
  std::map<int, std::vector<PointPrediction>> frames_;
};

}  // namespace radar_height
