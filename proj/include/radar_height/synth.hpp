#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "radar_height/geometry.hpp"
#include "radar_height/tensor.hpp"

namespace radar_height {

template <typename T>
struct Range {
  T min{};
  T max{};
  bool operator==(const Range&) const = default;
};

struct SceneSpec {
  std::uint64_t seed = 42;
  int n_frames = 500;
  Range<int> objects_per_frame{1, 4};
  Range<double> object_height{0.5, 3.0};
  Range<double> object_length{0.6, 4.5};
  Range<double> object_width{0.5, 2.0};
  Range<double> object_distance{5.0, 40.0};
  Range<int> points_per_object{1, 3};
  Range<int> clutter_points{3, 8};
  Range<double> clutter_distance{3.0, 50.0};
  double inside_box_unassociated_rate = 0.2;
  double camera_height = 1.5;  // ground plane at y = camera_height
  double noise = 0.05;         // position jitter sigma, m
  CameraModel camera{80.0, 80.0, 48.0, 32.0, 96, 64};

  bool operator==(const SceneSpec&) const = default;
};

/// Throws ConfigError describing the first invalid field.
void validate(const SceneSpec& spec);

/// Frames with ids 0..n-1. Each frame is drawn from its own stream derived
/// from (seed, frame index), so frames do not depend on one another.
/// Associated points sit on the camera-facing face of their box and are
/// recorded in Frame::associations; clutter points lie outside every box, a
/// share of them deliberately projecting inside a box's 2D rectangle.
std::vector<Frame> generate(const SceneSpec& spec);

Frame generate_frame(const SceneSpec& spec, int index);

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
  bool operator==(const Split&) const = default;
};

/// Seeded shuffle of the ids, then contiguous parts sized by largest remainder.
/// Throws ConfigError when a ratio is not positive or there are fewer ids than parts.
Split split(const std::vector<int>& frame_ids, std::array<double, 3> ratios, std::uint64_t seed);

/// Visual stand-in: background gradient plus flat distance-shaded box fills,
/// painted far to near. Shape (3, H, W), values in [0, 1].
Tensor render_visual(const Frame& frame);

}  // namespace radar_height
