#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "radar_height/geometry.hpp"
#include "radar_height/grid.hpp"
#include "radar_height/prediction_store.hpp"

namespace radar_height {

/// Four-channel image-plane radar raster. Pixels without radar content are zero
/// in every channel; `point_id` records which point painted a pixel (-1 if none).
struct RadarImage {
  Grid<double> rcs;
  Grid<double> distance;  // Euclidean range, m
  Grid<double> vx;
  Grid<double> vy;
  Grid<int> point_id;

  RadarImage() = default;
  RadarImage(int rows, int cols)
      : rcs(rows, cols), distance(rows, cols), vx(rows, cols), vy(rows, cols), point_id(rows, cols, -1) {}

  int rows() const { return rcs.rows(); }
  int cols() const { return rcs.cols(); }
  bool operator==(const RadarImage&) const = default;
};

struct PointHeight {
  int point_id = 0;
  double height = 0.0;
  bool operator==(const PointHeight&) const = default;
};

enum class ExtensionMethod { kNone, kFixed, kDirect, kFilter, kAdaptive };

std::string_view to_string(ExtensionMethod m);
std::optional<ExtensionMethod> parse_extension_method(std::string_view name);

struct ExtensionSpec {
  ExtensionMethod method = ExtensionMethod::kDirect;
  double fixed_height = 1.0;      // m
  double filter_threshold = 0.5;  // m

  bool operator==(const ExtensionSpec&) const = default;
};

void validate(const ExtensionSpec& spec);

/// Number of pixels a point of the given height extends above its projection at depth z.
int line_length(const CameraModel& cam, double height, double depth);

/// Paints each listed point as a vertical line growing upward from its projected
/// pixel by line_length() pixels, clipped to the image. All four channels carry
/// the point's values. On overlap the nearer point (range, then id) wins.
/// Points not listed in `heights` are not drawn.
RadarImage render_radar_image(const Frame& frame, const std::vector<PointHeight>& heights);

/// Every radar point receives spec.fixed_height.
std::vector<PointHeight> extend_fixed(const Frame& frame, const ExtensionSpec& spec);

/// Heights read from the model's predictions at each point's pixel.
/// Throws ConfigError when the store has no entry for the frame.
std::vector<PointHeight> extend_direct(const Frame& frame, const PredictionStore& predictions);

struct FilterResult {
  std::vector<PointHeight> survivors;
  int removed = 0;
};

/// extend_direct, then drops points predicted below spec.filter_threshold.
FilterResult extend_filter(const Frame& frame, const PredictionStore& predictions, const ExtensionSpec& spec);

/// Dispatches on spec.method. kNone yields zero heights (plain projection);
/// kAdaptive throws NotImplementedError.
std::vector<PointHeight> extend(const Frame& frame, const ExtensionSpec& spec, const PredictionStore* predictions);

}  // namespace radar_height
