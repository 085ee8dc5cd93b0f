#pragma once

// Slow, direct re-statements of the definitions, written without calling the
// library code they check. Used as references in unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "radar_height/geometry.hpp"
#include "radar_height/ground_truth.hpp"
#include "radar_height/loss.hpp"
#include "radar_height/metrics.hpp"

namespace oracle {

using namespace radar_height;

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

inline std::optional<Pixel> project(const CameraModel& cam, const Vec3& p) {
  if (p.z <= 0.0) return std::nullopt;
  const double u = cam.fx * p.x / p.z + cam.cx;
  const double v = cam.fy * p.y / p.z + cam.cy;
  if (std::abs(u) > 1e6 || std::abs(v) > 1e6) return std::nullopt;
  const int row = round_half_up(v);
  const int col = round_half_up(u);
  if (row < 0 || row >= cam.height || col < 0 || col >= cam.width) return std::nullopt;
  return Pixel{row, col};
}

// Box axes in camera coordinates: length axis, height axis (down), width axis.
struct Axes {
  Vec3 ex, ey, ez;
};

inline Axes box_axes(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {{c, 0.0, -s}, {0.0, 1.0, 0.0}, {s, 0.0, c}};
}

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline bool inside(const Box3D& b, const Vec3& p) {
  const Axes a = box_axes(b.yaw);
  const Vec3 d{p.x - b.center.x, p.y - b.center.y, p.z - b.center.z};
  return std::abs(dot(d, a.ex)) <= b.size.length / 2 && std::abs(dot(d, a.ey)) <= b.size.height / 2 &&
         std::abs(dot(d, a.ez)) <= b.size.width / 2;
}

inline std::vector<Vec3> corners(const Box3D& b) {
  const Axes a = box_axes(b.yaw);
  std::vector<Vec3> out;
  for (double sx : {-0.5, 0.5}) {
    for (double sy : {-0.5, 0.5}) {
      for (double sz : {-0.5, 0.5}) {
        const double lx = sx * b.size.length, ly = sy * b.size.height, lz = sz * b.size.width;
        out.push_back({b.center.x + lx * a.ex.x + lz * a.ez.x, b.center.y + ly, b.center.z + lx * a.ex.z + lz * a.ez.z});
      }
    }
  }
  return out;
}

// Continuous image rectangle of a box lying wholly in front of the camera: {rmin, rmax, cmin, cmax}.
inline std::array<double, 4> image_rect(const CameraModel& cam, const Box3D& b) {
  std::array<double, 4> r{1e300, -1e300, 1e300, -1e300};
  for (const auto& c : corners(b)) {
    const double v = cam.fy * c.y / c.z + cam.cy;
    const double u = cam.fx * c.x / c.z + cam.cx;
    r[0] = std::min(r[0], v);
    r[1] = std::max(r[1], v);
    r[2] = std::min(r[2], u);
    r[3] = std::max(r[3], u);
  }
  return r;
}

inline bool pixel_in_rect(const std::array<double, 4>& r, int row, int col) {
  return row >= round_half_up(r[0]) && row <= round_half_up(r[1]) && col >= round_half_up(r[2]) &&
         col <= round_half_up(r[3]);
}

inline double dist(const Vec3& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }

inline std::optional<int> owner_box(const Frame& f, const RadarPoint& p) {
  if (f.associations) {
    const auto it = f.associations->find(p.id);
    if (it == f.associations->end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& b : f.objects) {
    if (!inside(b, p.position)) continue;
    const double d = dist({p.position.x - b.center.x, p.position.y - b.center.y, p.position.z - b.center.z});
    if (d < best_d) {
      best_d = d;
      best = b.id;
    }
  }
  return best;
}

inline double object_height(const Frame& f, int id) {
  for (const auto& b : f.objects) {
    if (b.id == id) return b.size.height;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct PixelTruth {
  Region region = Region::kBackground;
  double height = 0.0;
};

// Decides one pixel from scratch: radar points first, then boxes.
inline PixelTruth pixel_truth(const Frame& f, int row, int col) {
  const RadarPoint* winner = nullptr;
  for (const auto& p : f.radar) {
    const auto px = project(f.camera, p.position);
    if (!px || px->row != row || px->col != col) continue;
    if (!winner) {
      winner = &p;
      continue;
    }
    const double a = dist(p.position), b = dist(winner->position);
    if (a < b || (a == b && p.id < winner->id)) winner = &p;
  }
  if (winner) {
    const auto m = owner_box(f, *winner);
    return {Region::kRadar, m ? object_height(f, *m) : 0.0};
  }
  const Box3D* best = nullptr;
  for (const auto& b : f.objects) {
    if (!pixel_in_rect(image_rect(f.camera, b), row, col)) continue;
    if (!best) {
      best = &b;
      continue;
    }
    const double a = dist(b.center), d = dist(best->center);
    if (a < d || (a == d && b.id < best->id)) best = &b;
  }
  if (best) return {Region::kForeground, best->size.height};
  return {};
}

inline bool in_any_rect(const Frame& f, int row, int col) {
  for (const auto& b : f.objects) {
    if (pixel_in_rect(image_rect(f.camera, b), row, col)) return true;
  }
  return false;
}

// Pointwise losses written straight from their definitions.
inline double loss(LossKind kind, double sigma, double dh) {
  dh = std::abs(dh);
  const double w = std::log(dh + 1.0);
  const double knee = 1.0 / (sigma * sigma);
  const double huber = dh < knee ? 0.5 * sigma * sigma * dh * dh : dh - 1.0 / (2.0 * sigma * sigma);
  switch (kind) {
    case LossKind::kL1: return dh;
    case LossKind::kL2: return dh * dh;
    case LossKind::kWL1: return dh * w;
    case LossKind::kWL2: return dh * dh * w;
    case LossKind::kHuber: return huber;
    case LossKind::kEHL: return huber * w;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Aggregation only: the per-pixel value comes from `pixel_loss`, so the result can be compared bit for bit.
template <typename PixelLoss>
RegionLosses region_losses(const LossSpec& s, const HeightMap& gt, const HeightMap& pred, const RegionPartition& part,
                           PixelLoss pixel_loss) {
  double sum[3] = {0, 0, 0};
  long long n[3] = {0, 0, 0};
  for (int i = 0; i < gt.rows(); ++i) {
    for (int j = 0; j < gt.cols(); ++j) {
      const int r = static_cast<int>(part(i, j));
      sum[r] += pixel_loss(gt(i, j), pred(i, j));
      ++n[r];
    }
  }
  RegionLosses out;
  out.l_bg = n[0] ? sum[0] / n[0] : 0.0;
  out.l_fg = n[1] ? sum[1] / n[1] : 0.0;
  out.l_rad = n[2] ? sum[2] / n[2] : 0.0;
  out.l_reg = s.alpha * out.l_bg + s.beta * out.l_fg + s.gamma * out.l_rad;
  return out;
}

inline HeightErrorReport height_report(const HeightMap& gt, const HeightMap& pred, const RegionPartition& part) {
  double all = 0, rad = 0, nz = 0, z = 0;
  int n_all = 0, n_rad = 0, n_nz = 0, n_z = 0;
  for (int i = 0; i < gt.rows(); ++i) {
    for (int j = 0; j < gt.cols(); ++j) {
      const double e = std::abs(gt(i, j) - pred(i, j));
      all += e;
      ++n_all;
      if (part(i, j) != Region::kRadar) continue;
      rad += e;
      ++n_rad;
      if (gt(i, j) != 0.0) {
        nz += e;
        ++n_nz;
      } else {
        z += e;
        ++n_z;
      }
    }
  }
  HeightErrorReport r;
  if (n_all) r.bhe = all / n_all;
  if (n_rad) r.rhe = rad / n_rad;
  if (n_nz) r.rhe_nonzero = nz / n_nz;
  if (n_z) r.rhe_zero = z / n_z;
  r.radar_pixels = n_rad;
  r.nonzero_pixels = n_nz;
  return r;
}

inline DepthErrorReport depth_report(const Grid<double>& pred, const Grid<double>& gt, const Grid<std::uint8_t>& valid) {
  double abs_sum = 0, sq_sum = 0, rel_sum = 0;
  long long hits[3] = {0, 0, 0};
  long long n = 0;
  for (int i = 0; i < gt.rows(); ++i) {
    for (int j = 0; j < gt.cols(); ++j) {
      if (!valid(i, j)) continue;
      const double d = pred(i, j), g = gt(i, j);
      abs_sum += std::abs(d - g);
      sq_sum += (d - g) * (d - g);
      rel_sum += std::abs(d - g) / g;
      const double ratio = std::max(d / g, g / d);
      if (ratio < 1.25) ++hits[0];
      if (ratio < 1.25 * 1.25) ++hits[1];
      if (ratio < 1.25 * 1.25 * 1.25) ++hits[2];
      ++n;
    }
  }
  DepthErrorReport r;
  r.count = n;
  r.mae = abs_sum / n;
  r.rmse = std::sqrt(sq_sum / n);
  r.absrel = rel_sum / n;
  for (int k = 0; k < 3; ++k) r.delta[k] = static_cast<double>(hits[k]) / n;
  return r;
}

}  // namespace oracle
