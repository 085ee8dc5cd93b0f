#include "radar_height/radar_image.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "radar_height/errors.hpp"

namespace radar_height {

void PredictionStore::put(int frame_id, std::vector<PointPrediction> points) {
  std::sort(points.begin(), points.end(),
            [](const PointPrediction& a, const PointPrediction& b) { return a.point_id < b.point_id; });
  frames_[frame_id] = std::move(points);
}

std::optional<std::vector<PointPrediction>> PredictionStore::find(int frame_id) const {
  const auto it = frames_.find(frame_id);
  if (it == frames_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(ExtensionMethod m) {
  switch (m) {
    case ExtensionMethod::kNone: return "none";
    case ExtensionMethod::kFixed: return "fixed";
    case ExtensionMethod::kDirect: return "direct";
    case ExtensionMethod::kFilter: return "filter";
    case ExtensionMethod::kAdaptive: return "ah";
  }
  return "?";
}

std::optional<ExtensionMethod> parse_extension_method(std::string_view name) {
  for (auto m : {ExtensionMethod::kNone, ExtensionMethod::kFixed, ExtensionMethod::kDirect, ExtensionMethod::kFilter,
                 ExtensionMethod::kAdaptive}) {
    if (name == to_string(m)) return m;
  }
  if (name == "adaptive") return ExtensionMethod::kAdaptive;
  return std::nullopt;
}

void validate(const ExtensionSpec& spec) {
  if (!(spec.fixed_height > 0.0) || !std::isfinite(spec.fixed_height)) {
    throw ConfigError("extension.fixed_height must be > 0");
  }
  if (!(spec.filter_threshold >= 0.0) || !std::isfinite(spec.filter_threshold)) {
    throw ConfigError("extension.filter_threshold must be >= 0");
  }
}

int line_length(const CameraModel& cam, double height, double depth) {
  if (!(height > 0.0) || !(depth > 0.0)) return 0;
  const double px = height * cam.fy / depth;
  // Anything taller than the image is clipped anyway.
  return px >= cam.height ? cam.height : round_pixel(px);
}

RadarImage render_radar_image(const Frame& frame, const std::vector<PointHeight>& heights) {
  const CameraModel& cam = frame.camera;
  RadarImage img(cam.height, cam.width);
  Grid<double> owner_range(cam.height, cam.width, 0.0);

  std::map<int, const RadarPoint*> by_id;
  for (const auto& p : frame.radar) by_id[p.id] = &p;

  std::vector<PointHeight> ordered = heights;
  std::sort(ordered.begin(), ordered.end(), [](const PointHeight& a, const PointHeight& b) { return a.point_id < b.point_id; });

  for (const auto& ph : ordered) {
    const auto it = by_id.find(ph.point_id);
    if (it == by_id.end()) continue;
    const RadarPoint& p = *it->second;
    const auto px = project_point(cam, p.position);
    if (!px) continue;
    const double range = p.range();
    const int top = std::max(0, px->row - line_length(cam, ph.height, p.position.z));
    for (int i = top; i <= px->row; ++i) {
      const int current = img.point_id(i, px->col);
      if (current >= 0) {
        const double r = owner_range(i, px->col);
        if (r < range || (r == range && current < p.id)) continue;
      }
      img.point_id(i, px->col) = p.id;
      owner_range(i, px->col) = range;
      img.rcs(i, px->col) = p.rcs;
      img.distance(i, px->col) = range;
      img.vx(i, px->col) = p.vx;
      img.vy(i, px->col) = p.vy;
    }
  }
  return img;
}

std::vector<PointHeight> extend_fixed(const Frame& frame, const ExtensionSpec& spec) {
  std::vector<PointHeight> out;
  out.reserve(frame.radar.size());
  for (const auto& p : frame.radar) out.push_back({p.id, spec.fixed_height});
  return out;
}

std::vector<PointHeight> extend_direct(const Frame& frame, const PredictionStore& predictions) {
  const auto stored = predictions.find(frame.id);
  if (!stored) throw ConfigError("no predictions stored for frame " + std::to_string(frame.id));
  std::vector<PointHeight> out;
  out.reserve(stored->size());
  for (const auto& pp : *stored) out.push_back({pp.point_id, pp.height});
  return out;
}

FilterResult extend_filter(const Frame& frame, const PredictionStore& predictions, const ExtensionSpec& spec) {
  FilterResult result;
  for (const auto& ph : extend_direct(frame, predictions)) {
    if (ph.height >= spec.filter_threshold) {
      result.survivors.push_back(ph);
    } else {
      ++result.removed;
    }
  }
  return result;
}

std::vector<PointHeight> extend(const Frame& frame, const ExtensionSpec& spec, const PredictionStore* predictions) {
  switch (spec.method) {
    case ExtensionMethod::kNone: {
      std::vector<PointHeight> out;
      for (const auto& p : frame.radar) out.push_back({p.id, 0.0});
      return out;
    }
    case ExtensionMethod::kFixed:
      return extend_fixed(frame, spec);
    case ExtensionMethod::kDirect:
    case ExtensionMethod::kFilter:
      if (!predictions) throw ConfigError("direct/filter extension needs a prediction store");
      if (spec.method == ExtensionMethod::kDirect) return extend_direct(frame, *predictions);
      return extend_filter(frame, *predictions, spec).survivors;
    case ExtensionMethod::kAdaptive:
      throw NotImplementedError("adaptive height (AH) extension is not implemented; use fixed, direct or filter");
  }
  return {};
}

}  // namespace radar_height
