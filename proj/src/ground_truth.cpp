#include "radar_height/ground_truth.hpp"

#include <algorithm>

#include "radar_height/errors.hpp"

namespace radar_height {

namespace {

void require_valid(const Frame& frame) {
  if (auto v = frame_violation(frame)) {
    throw ConfigError("frame " + std::to_string(frame.id) + ": " + *v);
  }
}

struct PaintedBox {
  Box2D rect;
  double distance;
  int id;
  double height;
};

// Projected boxes ordered far-to-near so that painting in order leaves the nearest on top.
std::vector<PaintedBox> boxes_far_to_near(const Frame& frame) {
  std::vector<PaintedBox> boxes;
  for (const auto& b : frame.objects) {
    if (auto rect = project_box_2d(frame.camera, b)) {
      boxes.push_back({*rect, b.center.norm(), b.id, b.size.height});
    }
  }
  std::sort(boxes.begin(), boxes.end(), [](const PaintedBox& a, const PaintedBox& b) {
    if (a.distance != b.distance) return a.distance > b.distance;
    return a.id > b.id;
  });
  return boxes;
}

}  // namespace

std::vector<ProjectedRadar> RadarProjection::winners() const {
  std::vector<ProjectedRadar> out;
  for (int owner_index : owner.values()) {
    if (owner_index >= 0) out.push_back(points[static_cast<std::size_t>(owner_index)]);
  }
  return out;
}

RadarProjection project_radar(const Frame& frame) {
  RadarProjection proj;
  proj.owner = Grid<int>(frame.camera.height, frame.camera.width, -1);
  for (std::size_t k = 0; k < frame.radar.size(); ++k) {
    const auto& p = frame.radar[k];
    const auto px = project_point(frame.camera, p.position);
    if (!px) continue;
    const int slot = static_cast<int>(proj.points.size());
    proj.points.push_back({k, p.id, *px, p.range()});
    int& owner = proj.owner(px->row, px->col);
    if (owner < 0) {
      owner = slot;
    } else {
      const auto& current = proj.points[static_cast<std::size_t>(owner)];
      const auto& incoming = proj.points.back();
      if (incoming.range < current.range || (incoming.range == current.range && incoming.id < current.id)) {
        owner = slot;
      }
    }
  }
  return proj;
}

HeightMap box_height_raster(const Frame& frame) {
  HeightMap raster(frame.camera.height, frame.camera.width, 0.0);
  for (const auto& b : boxes_far_to_near(frame)) {
    for (int i = b.rect.row_min; i <= b.rect.row_max; ++i) {
      for (int j = b.rect.col_min; j <= b.rect.col_max; ++j) raster(i, j) = b.height;
    }
  }
  return raster;
}

GroundTruth build_height_map(const Frame& frame) {
  require_valid(frame);
  const int rows = frame.camera.height;
  const int cols = frame.camera.width;
  GroundTruth gt{HeightMap(rows, cols, 0.0), RegionPartition(rows, cols, Region::kBackground)};

  for (const auto& b : boxes_far_to_near(frame)) {
    for (int i = b.rect.row_min; i <= b.rect.row_max; ++i) {
      for (int j = b.rect.col_min; j <= b.rect.col_max; ++j) {
        gt.heights(i, j) = b.height;
        gt.partition(i, j) = Region::kForeground;
      }
    }
  }

  const auto links = associate(frame);
  const auto proj = project_radar(frame);
  for (const auto& p : proj.winners()) {
    double h = 0.0;
    if (const auto m = links.at(p.id)) {
      const Box3D* box = frame.find_object(*m);
      h = box->size.height;
    }
    gt.heights(p.pixel.row, p.pixel.col) = h;
    gt.partition(p.pixel.row, p.pixel.col) = Region::kRadar;
  }
  return gt;
}

SegMask build_seg_mask(const Frame& frame) {
  require_valid(frame);
  const int rows = frame.camera.height;
  const int cols = frame.camera.width;
  SegMask mask{Grid<double>(rows, cols, 1.0), Grid<double>(rows, cols, 0.0)};
  for (const auto& b : frame.objects) {
    const auto rect = project_box_2d(frame.camera, b);
    if (!rect) continue;
    for (int i = rect->row_min; i <= rect->row_max; ++i) {
      for (int j = rect->col_min; j <= rect->col_max; ++j) {
        mask.free_space(i, j) = 0.0;
        mask.occupied(i, j) = 1.0;
      }
    }
  }
  return mask;
}

}  // namespace radar_height
