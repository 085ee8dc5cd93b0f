#include "radar_height/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

namespace radar_height {

namespace {

constexpr double kNearPlane = 1e-3;

// Corner index bits: 1 -> +x, 2 -> +y, 4 -> +z in the local frame.
constexpr std::array<std::pair<int, int>, 12> kBoxEdges{{
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // along x
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // along y
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // along z
}};

// Pixel index range covered by a continuous interval, intersected with [0, extent).
std::optional<std::pair<int, int>> pixel_span(double lo, double hi, int extent) {
  lo = std::clamp(lo, -1.0, static_cast<double>(extent));
  hi = std::clamp(hi, -1.0, static_cast<double>(extent));
  const int a = std::max(round_pixel(lo), 0);
  const int b = std::min(round_pixel(hi), extent - 1);
  if (a > b) return std::nullopt;
  return std::make_pair(a, b);
}

}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

const Box3D* Frame::find_object(int object_id) const {
  for (const auto& b : objects) {
    if (b.id == object_id) return &b;
  }
  return nullptr;
}

int round_pixel(double v) { return static_cast<int>(std::floor(v + 0.5)); }

std::pair<double, double> image_coords(const CameraModel& cam, const Vec3& p) {
  return {cam.fy * p.y / p.z + cam.cy, cam.fx * p.x / p.z + cam.cx};
}

std::optional<Pixel> project_point(const CameraModel& cam, const Vec3& p) {
  if (!(p.z > 0.0)) return std::nullopt;
  const auto [r, c] = image_coords(cam, p);
  // Reject before rounding so far-off coordinates cannot overflow int.
  if (!(r > -1.0 && r < cam.height + 1.0 && c > -1.0 && c < cam.width + 1.0)) return std::nullopt;
  const Pixel px{round_pixel(r), round_pixel(c)};
  if (px.row < 0 || px.row >= cam.height || px.col < 0 || px.col >= cam.width) return std::nullopt;
  return px;
}

Vec3 to_box_local(const Box3D& box, const Vec3& p) {
  const Vec3 d = p - box.center;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return {c * d.x - s * d.z, d.y, s * d.x + c * d.z};
}

Vec3 from_box_local(const Box3D& box, const Vec3& local) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return Vec3{c * local.x + s * local.z, local.y, -s * local.x + c * local.z} + box.center;
}

bool point_in_box_3d(const Box3D& box, const Vec3& p) {
  const Vec3 l = to_box_local(box, p);
  return std::abs(l.x) <= 0.5 * box.size.length && std::abs(l.y) <= 0.5 * box.size.height &&
         std::abs(l.z) <= 0.5 * box.size.width;
}

std::vector<Vec3> box_corners(const Box3D& box) {
  std::vector<Vec3> corners;
  corners.reserve(8);
  const double hx = 0.5 * box.size.length;
  const double hy = 0.5 * box.size.height;
  const double hz = 0.5 * box.size.width;
  for (int k = 0; k < 8; ++k) {
    const Vec3 local{(k & 1) ? hx : -hx, (k & 2) ? hy : -hy, (k & 4) ? hz : -hz};
    corners.push_back(from_box_local(box, local));
  }
  return corners;
}

std::optional<Box2D> project_box_2d(const CameraModel& cam, const Box3D& box) {
  const auto corners = box_corners(box);
  std::vector<Vec3> visible;
  for (const auto& c : corners) {
    if (c.z >= kNearPlane) visible.push_back(c);
  }
  if (visible.empty()) return std::nullopt;
  if (visible.size() < corners.size()) {
    for (const auto& [a, b] : kBoxEdges) {
      const Vec3& pa = corners[a];
      const Vec3& pb = corners[b];
      if ((pa.z < kNearPlane) != (pb.z < kNearPlane)) {
        const double t = (kNearPlane - pa.z) / (pb.z - pa.z);
        Vec3 cut = pa + (pb - pa) * t;
        cut.z = kNearPlane;
        visible.push_back(cut);
      }
    }
  }

  double rmin = std::numeric_limits<double>::infinity();
  double rmax = -rmin;
  double cmin = rmin;
  double cmax = -rmin;
  for (const auto& v : visible) {
    const auto [r, c] = image_coords(cam, v);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  }
  const auto rows = pixel_span(rmin, rmax, cam.height);
  const auto cols = pixel_span(cmin, cmax, cam.width);
  if (!rows || !cols) return std::nullopt;
  return Box2D{rows->first, rows->second, cols->first, cols->second};
}

std::map<int, std::optional<int>> associate(const Frame& frame) {
  std::map<int, std::optional<int>> out;
  if (frame.associations) {
    for (const auto& p : frame.radar) {
      const auto it = frame.associations->find(p.id);
      out[p.id] = it == frame.associations->end() ? std::nullopt : std::optional<int>(it->second);
    }
    return out;
  }
  for (const auto& p : frame.radar) {
    std::optional<int> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& b : frame.objects) {
      if (!point_in_box_3d(b, p.position)) continue;
      const double d = (p.position - b.center).norm();
      if (d < best_dist) {
        best_dist = d;
        best = b.id;
      }
    }
    out[p.id] = best;
  }
  return out;
}

std::optional<std::string> camera_violation(const CameraModel& cam) {
  if (cam.width <= 0 || cam.height <= 0) return "camera: image dims must be positive";
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) return "camera: focal lengths must be positive";
  if (!(cam.cx >= 0.0 && cam.cx < cam.width)) return "camera.cx outside [0, width)";
  if (!(cam.cy >= 0.0 && cam.cy < cam.height)) return "camera.cy outside [0, height)";
  return std::nullopt;
}

std::optional<std::string> frame_violation(const Frame& frame) {
  if (auto v = camera_violation(frame.camera)) return v;
  std::set<int> object_ids;
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    const auto& b = frame.objects[i];
    const std::string where = "objects[" + std::to_string(i) + "]";
    if (!object_ids.insert(b.id).second) return where + ".id duplicated";
    if (!(b.size.length > 0.0 && b.size.width > 0.0 && b.size.height > 0.0)) {
      return where + ".size must be positive";
    }
    if (!std::isfinite(b.center.x) || !std::isfinite(b.center.y) || !std::isfinite(b.center.z) ||
        !std::isfinite(b.yaw)) {
      return where + " has non-finite pose";
    }
  }
  std::set<int> radar_ids;
  for (std::size_t i = 0; i < frame.radar.size(); ++i) {
    const auto& p = frame.radar[i];
    const std::string where = "radar[" + std::to_string(i) + "]";
    if (!radar_ids.insert(p.id).second) return where + ".id duplicated";
    if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y) || !std::isfinite(p.position.z) ||
        !std::isfinite(p.rcs) || !std::isfinite(p.vx) || !std::isfinite(p.vy)) {
      return where + " has non-finite field";
    }
  }
  if (frame.associations) {
    for (const auto& [k, m] : *frame.associations) {
      if (!radar_ids.count(k)) return "associations: unknown radar id " + std::to_string(k);
      if (!object_ids.count(m)) return "associations: radar " + std::to_string(k) + " -> unknown object " + std::to_string(m);
    }
  }
  return std::nullopt;
}

}  // namespace radar_height
