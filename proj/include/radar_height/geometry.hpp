#pragma once

// Camera-frame geometry: x right, y down, z forward (meters). Image rows grow
// with y, columns with x. Boxes rotate about the vertical (y) axis.

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace radar_height {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double norm() const;
  bool operator==(const Vec3&) const = default;
};

struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool operator==(const CameraModel&) const = default;
};

struct Pixel {
  int row = 0;
  int col = 0;
  bool operator==(const Pixel&) const = default;
  auto operator<=>(const Pixel&) const = default;
};

struct RadarPoint {
  int id = 0;
  Vec3 position;
  double rcs = 0.0;  // dBsm
  double vx = 0.0;   // m/s
  double vy = 0.0;   // m/s

  double range() const { return position.norm(); }
  bool operator==(const RadarPoint&) const = default;
};

struct BoxSize {
  double length = 0.0;  // along local x
  double width = 0.0;   // along local z
  double height = 0.0;  // along y
  bool operator==(const BoxSize&) const = default;
};

struct Box3D {
  int id = 0;
  Vec3 center;
  BoxSize size;
  double yaw = 0.0;  // rad, about the y axis

  bool operator==(const Box3D&) const = default;
};

/// Inclusive pixel bounds of a projected box.
struct Box2D {
  int row_min = 0;
  int row_max = 0;
  int col_min = 0;
  int col_max = 0;

  bool contains(int row, int col) const {
    return row >= row_min && row <= row_max && col >= col_min && col <= col_max;
  }
  long long area() const {
    return static_cast<long long>(row_max - row_min + 1) * (col_max - col_min + 1);
  }
  bool operator==(const Box2D&) const = default;
};

struct Frame {
  int id = 0;
  CameraModel camera;
  std::vector<RadarPoint> radar;
  std::vector<Box3D> objects;
  // Explicit radar id -> object id map. Radar ids missing from the map are unassociated.
  std::optional<std::map<int, int>> associations;

  const Box3D* find_object(int object_id) const;
  bool operator==(const Frame&) const = default;
};

/// Round half up, used for every continuous-to-pixel conversion.
int round_pixel(double v);

/// Continuous image coordinates (row, col) of a camera-frame point; no bounds check. Requires p.z > 0.
std::pair<double, double> image_coords(const CameraModel& cam, const Vec3& p);

std::optional<Pixel> project_point(const CameraModel& cam, const Vec3& p);

/// Expresses p in the box's local (yaw-rotated, centered) frame.
Vec3 to_box_local(const Box3D& box, const Vec3& p);
Vec3 from_box_local(const Box3D& box, const Vec3& local);

bool point_in_box_3d(const Box3D& box, const Vec3& p);

/// The eight corners in world coordinates.
std::vector<Vec3> box_corners(const Box3D& box);

/// Axis-aligned pixel rectangle around the projected box, clipped to the image.
/// Edges crossing the near plane are clipped first, so partially visible boxes are handled.
std::optional<Box2D> project_box_2d(const CameraModel& cam, const Box3D& box);

/// radar id -> object id (or none) for every radar point, in radar order.
std::map<int, std::optional<int>> associate(const Frame& frame);

/// First invariant violation found, described with its field; empty when the frame is valid.
std::optional<std::string> frame_violation(const Frame& frame);
std::optional<std::string> camera_violation(const CameraModel& cam);

}  // namespace radar_height
