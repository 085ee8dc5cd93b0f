#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radar_height/geometry.hpp"
#include "radar_height/radar_image.hpp"
#include "radar_height/tensor.hpp"

namespace radar_height {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kAssociatedColor{255, 220, 0};
inline constexpr Rgb kUnassociatedColor{230, 30, 30};

struct RgbImage {
  int rows = 0;
  int cols = 0;
  std::vector<Rgb> pixels;

  RgbImage() = default;
  RgbImage(int r, int c) : rows(r), cols(c), pixels(static_cast<std::size_t>(r) * c) {}
  Rgb& operator()(int i, int j) { return pixels[static_cast<std::size_t>(i) * cols + j]; }
  const Rgb& operator()(int i, int j) const { return pixels[static_cast<std::size_t>(i) * cols + j]; }
};

/// Three-channel [0, 1] tensor to 8-bit RGB.
RgbImage to_rgb(const Tensor& visual);

/// Scene raster with each extended point drawn as its vertical line: yellow when the
/// point belongs to an object, red otherwise. Overlaps resolve as in render_radar_image.
RgbImage render_overlay(const Frame& frame, const std::vector<PointHeight>& heights);

/// Binary PPM (P6).
std::string encode_ppm(const RgbImage& img);

}  // namespace radar_height
