#include "radar_height/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "radar_height/errors.hpp"
#include "radar_height/rng.hpp"

namespace radar_height {

namespace {

constexpr int kPlacementAttempts = 200;
constexpr int kPointAttempts = 50;

template <typename T>
void check_range(const Range<T>& r, const char* name, bool allow_zero) {
  const bool ok = allow_zero ? (r.min >= 0 && r.max >= r.min) : (r.min > 0 && r.max >= r.min);
  if (!ok) throw ConfigError(std::string("scene.") + name + ": range must be non-empty and " +
                             (allow_zero ? "non-negative" : "positive"));
}

double horizontal_radius(const Box3D& b) { return 0.5 * std::hypot(b.size.length, b.size.width); }

bool inside_any(const std::vector<Box3D>& boxes, const Vec3& p) {
  return std::any_of(boxes.begin(), boxes.end(), [&](const Box3D& b) { return point_in_box_3d(b, p); });
}

std::vector<Box3D> place_objects(const SceneSpec& spec, Rng& rng, int frame_index) {
  const CameraModel& cam = spec.camera;
  const int n = static_cast<int>(rng.uniform_int(spec.objects_per_frame.min, spec.objects_per_frame.max));
  std::vector<Box3D> boxes;
  for (int m = 0; m < n; ++m) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      Box3D b;
      b.id = m;
      b.size = {rng.uniform(spec.object_length.min, spec.object_length.max),
                rng.uniform(spec.object_width.min, spec.object_width.max),
                rng.uniform(spec.object_height.min, spec.object_height.max)};
      b.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
      const double z = rng.uniform(spec.object_distance.min, spec.object_distance.max);
      const double u = rng.uniform(0.1 * cam.width, 0.9 * cam.width);
      b.center = {(u - cam.cx) * z / cam.fx, spec.camera_height - 0.5 * b.size.height, z};

      if (b.center.z - horizontal_radius(b) < 1.0) continue;
      const bool overlaps = std::any_of(boxes.begin(), boxes.end(), [&](const Box3D& o) {
        return std::hypot(o.center.x - b.center.x, o.center.z - b.center.z) <
               horizontal_radius(o) + horizontal_radius(b) + 0.2;
      });
      if (overlaps || !project_box_2d(cam, b)) continue;
      boxes.push_back(b);
      placed = true;
    }
    if (!placed) {
      throw ConfigError("scene spec infeasible: could not place object " + std::to_string(m) + " in frame " +
                        std::to_string(frame_index) + " without overlap");
    }
  }
  return boxes;
}

// A point on the vertical face nearest the camera, in the lower part of the box.
Vec3 sample_on_facing_side(const Box3D& b, double noise, Rng& rng) {
  const double hx = 0.5 * b.size.length;
  const double hy = 0.5 * b.size.height;
  const double hz = 0.5 * b.size.width;
  const Vec3 faces[4] = {{hx, 0, 0}, {-hx, 0, 0}, {0, 0, hz}, {0, 0, -hz}};
  int best = 0;
  double best_dist = from_box_local(b, faces[0]).norm();
  for (int f = 1; f < 4; ++f) {
    const double d = from_box_local(b, faces[f]).norm();
    if (d < best_dist) {
      best_dist = d;
      best = f;
    }
  }
  Vec3 local;
  local.y = rng.uniform(0.3 * hy, 0.9 * hy);
  if (best < 2) {
    local.x = faces[best].x * 0.98;
    local.z = rng.uniform(-0.9 * hz, 0.9 * hz);
  } else {
    local.z = faces[best].z * 0.98;
    local.x = rng.uniform(-0.9 * hx, 0.9 * hx);
  }
  Vec3 world = from_box_local(b, local);
  world = world + Vec3{rng.normal(0.0, noise), rng.normal(0.0, noise), rng.normal(0.0, noise)};
  // Jitter must not carry the point out of its box.
  Vec3 l = to_box_local(b, world);
  l.x = std::clamp(l.x, -0.99 * hx, 0.99 * hx);
  l.y = std::clamp(l.y, -0.99 * hy, 0.99 * hy);
  l.z = std::clamp(l.z, -0.99 * hz, 0.99 * hz);
  return from_box_local(b, l);
}

}  // namespace

void validate(const SceneSpec& spec) {
  if (auto v = camera_violation(spec.camera)) throw ConfigError("scene." + *v);
  if (spec.n_frames < 1) throw ConfigError("scene.n_frames must be >= 1");
  check_range(spec.objects_per_frame, "objects_per_frame", true);
  check_range(spec.object_height, "object_height", false);
  check_range(spec.object_length, "object_length", false);
  check_range(spec.object_width, "object_width", false);
  check_range(spec.object_distance, "object_distance", false);
  check_range(spec.points_per_object, "points_per_object", true);
  check_range(spec.clutter_points, "clutter_points", true);
  check_range(spec.clutter_distance, "clutter_distance", false);
  if (!(spec.inside_box_unassociated_rate >= 0.0 && spec.inside_box_unassociated_rate <= 1.0)) {
    throw ConfigError("scene.inside_box_unassociated_rate must be in [0, 1]");
  }
  if (!(spec.noise >= 0.0)) throw ConfigError("scene.noise must be >= 0");
  if (!(spec.camera_height > 0.0)) throw ConfigError("scene.camera_height must be > 0");
}

Frame generate_frame(const SceneSpec& spec, int index) {
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(index)));
  const CameraModel& cam = spec.camera;
  Frame frame;
  frame.id = index;
  frame.camera = cam;
  frame.objects = place_objects(spec, rng, index);
  frame.associations.emplace();

  int next_id = 0;
  std::set<Pixel> occupied;
  auto add_point = [&](const Vec3& pos, double rcs, double vx, double vy) {
    frame.radar.push_back({next_id, pos, rcs, vx, vy});
    if (auto px = project_point(cam, pos)) occupied.insert(*px);
    return next_id++;
  };

  for (const auto& b : frame.objects) {
    const double vx = rng.uniform(-8.0, 8.0);
    const double vy = rng.uniform(-8.0, 8.0);
    const int n = static_cast<int>(rng.uniform_int(spec.points_per_object.min, spec.points_per_object.max));
    for (int k = 0; k < n; ++k) {
      const Vec3 pos = sample_on_facing_side(b, spec.noise, rng);
      const int id = add_point(pos, rng.uniform(-5.0, 20.0), vx + rng.normal(0.0, 0.3), vy + rng.normal(0.0, 0.3));
      (*frame.associations)[id] = b.id;
    }
  }

  std::vector<Box2D> rects;
  std::vector<const Box3D*> rect_boxes;
  for (const auto& b : frame.objects) {
    if (auto r = project_box_2d(cam, b)) {
      rects.push_back(*r);
      rect_boxes.push_back(&b);
    }
  }

  const int n_clutter = static_cast<int>(rng.uniform_int(spec.clutter_points.min, spec.clutter_points.max));
  int n_inside = 0;
  for (int k = 0; k < n_clutter; ++k) {
    if (!rects.empty() && rng.bernoulli(spec.inside_box_unassociated_rate)) {
      ++n_inside;
      continue;
    }
    for (int attempt = 0; attempt < kPointAttempts; ++attempt) {
      const double z = rng.uniform(spec.clutter_distance.min, spec.clutter_distance.max);
      const double u = rng.uniform(0.0, static_cast<double>(cam.width));
      const Vec3 pos{(u - cam.cx) * z / cam.fx, spec.camera_height - rng.uniform(0.0, 0.4), z};
      if (inside_any(frame.objects, pos)) continue;
      add_point(pos, rng.uniform(-15.0, 5.0), rng.normal(0.0, 0.5), rng.normal(0.0, 0.5));
      break;
    }
  }

  // Clutter that projects inside a 2D box but lies behind the object in 3D.
  for (int k = 0; k < n_inside; ++k) {
    for (int attempt = 0; attempt < kPointAttempts; ++attempt) {
      const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(rects.size()) - 1));
      const Box2D& r = rects[pick];
      const Pixel px{static_cast<int>(rng.uniform_int(r.row_min, r.row_max)),
                     static_cast<int>(rng.uniform_int(r.col_min, r.col_max))};
      if (occupied.count(px)) continue;
      const Box3D& b = *rect_boxes[pick];
      const double z = b.center.z + horizontal_radius(b) + rng.uniform(1.0, 15.0);
      const Vec3 pos{(px.col - cam.cx) * z / cam.fx, (px.row - cam.cy) * z / cam.fy, z};
      if (inside_any(frame.objects, pos)) continue;
      const auto check = project_point(cam, pos);
      if (!check || !(*check == px)) continue;
      add_point(pos, rng.uniform(-15.0, 5.0), rng.normal(0.0, 0.5), rng.normal(0.0, 0.5));
      break;
    }
  }
  return frame;
}

std::vector<Frame> generate(const SceneSpec& spec) {
  validate(spec);
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(spec.n_frames));
  for (int i = 0; i < spec.n_frames; ++i) frames.push_back(generate_frame(spec, i));
  return frames;
}

Split split(const std::vector<int>& frame_ids, std::array<double, 3> ratios, std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("split ratios must be positive");
  }
  const std::size_t n = frame_ids.size();
  if (n < ratios.size()) throw ConfigError("dataset has fewer frames than split parts");

  const double total = ratios[0] + ratios[1] + ratios[2];
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * ratios[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    const auto i = static_cast<std::size_t>(std::max_element(remainder.begin(), remainder.end()) - remainder.begin());
    ++counts[i];
    remainder[i] = -1.0;
    ++assigned;
  }
  for (auto& c : counts) {
    if (c == 0) {
      auto& largest = *std::max_element(counts.begin(), counts.end());
      --largest;
      c = 1;
    }
  }

  std::vector<int> ids = frame_ids;
  Rng rng(derive_seed(seed, 0x5011755ULL));
  rng.shuffle(ids);
  Split s;
  auto begin = ids.begin();
  s.train.assign(begin, begin + static_cast<std::ptrdiff_t>(counts[0]));
  begin += static_cast<std::ptrdiff_t>(counts[0]);
  s.val.assign(begin, begin + static_cast<std::ptrdiff_t>(counts[1]));
  begin += static_cast<std::ptrdiff_t>(counts[1]);
  s.test.assign(begin, ids.end());
  return s;
}

Tensor render_visual(const Frame& frame) {
  const CameraModel& cam = frame.camera;
  Tensor img(3, cam.height, cam.width);
  for (int i = 0; i < cam.height; ++i) {
    const double t = static_cast<double>(i) / std::max(1, cam.height - 1);
    const bool sky = i < cam.cy;
    const double rgb[3] = {sky ? 0.55 + 0.2 * t : 0.35 - 0.1 * t, sky ? 0.65 + 0.2 * t : 0.35 - 0.1 * t,
                           sky ? 0.9 : 0.3 - 0.1 * t};
    for (int j = 0; j < cam.width; ++j) {
      for (int c = 0; c < 3; ++c) img.at(c, i, j) = rgb[c];
    }
  }

  struct Painted {
    Box2D rect;
    double distance;
    int id;
  };
  std::vector<Painted> boxes;
  for (const auto& b : frame.objects) {
    if (auto r = project_box_2d(cam, b)) boxes.push_back({*r, b.center.norm(), b.id});
  }
  std::sort(boxes.begin(), boxes.end(), [](const Painted& a, const Painted& b) {
    if (a.distance != b.distance) return a.distance > b.distance;
    return a.id > b.id;
  });
  for (const auto& b : boxes) {
    const double shade = 1.0 - 0.7 * std::clamp((b.distance - 5.0) / 45.0, 0.0, 1.0);
    const double fill[3] = {0.95 * shade, 0.55 * shade, 0.15 * shade};
    for (int i = b.rect.row_min; i <= b.rect.row_max; ++i) {
      for (int j = b.rect.col_min; j <= b.rect.col_max; ++j) {
        const bool edge = i == b.rect.row_min || i == b.rect.row_max || j == b.rect.col_min || j == b.rect.col_max;
        for (int c = 0; c < 3; ++c) img.at(c, i, j) = edge ? 0.1 * fill[c] : fill[c];
      }
    }
  }
  return img;
}

}  // namespace radar_height
