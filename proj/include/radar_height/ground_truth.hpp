#pragma once

#include <cstdint>
#include <vector>

#include "radar_height/geometry.hpp"
#include "radar_height/grid.hpp"

namespace radar_height {

using HeightMap = Grid<double>;

enum class Region : std::uint8_t { kBackground = 0, kForeground = 1, kRadar = 2 };

using RegionPartition = Grid<Region>;

/// Two complementary channels; `free_space` is 1 outside every projected box.
/// Predicted masks use the same type with probabilities in [0, 1].
struct SegMask {
  Grid<double> free_space;
  Grid<double> occupied;
  bool operator==(const SegMask&) const = default;
};

struct ProjectedRadar {
  std::size_t index = 0;  // into Frame::radar
  int id = 0;
  Pixel pixel;
  double range = 0.0;
};

/// Pixel projection of a frame's radar points.
struct RadarProjection {
  std::vector<ProjectedRadar> points;  // every in-bounds point, in frame order
  Grid<int> owner;                      // index into `points` of the pixel's winner, or -1

  /// Winning projections in row-major pixel order.
  std::vector<ProjectedRadar> winners() const;
};

/// Projects radar points; when several land on one pixel the nearer point
/// (smaller range, then smaller id) owns it.
RadarProjection project_radar(const Frame& frame);

struct GroundTruth {
  HeightMap heights;
  RegionPartition partition;
};

/// Ground-truth height map and its BG/FG/RAD partition.
///  - pixels inside projected boxes: FG, nearest object's height;
///  - pixels owned by a radar point: RAD, the associated object's height or 0,
///    even inside a 2D box;
///  - everything else: BG, 0.
GroundTruth build_height_map(const Frame& frame);

SegMask build_seg_mask(const Frame& frame);

/// Per-pixel object-height raster of the projected boxes (0 outside), nearest center wins.
HeightMap box_height_raster(const Frame& frame);

}  // namespace radar_height
