#include "radar_height/render.hpp"

#include <algorithm>
#include <cmath>

#include "radar_height/synth.hpp"

namespace radar_height {

RgbImage to_rgb(const Tensor& visual) {
  RgbImage img(visual.rows, visual.cols);
  auto byte = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  for (int i = 0; i < visual.rows; ++i) {
    for (int j = 0; j < visual.cols; ++j) {
      img(i, j) = {byte(visual.at(0, i, j)), byte(visual.at(1, i, j)), byte(visual.at(2, i, j))};
    }
  }
  return img;
}

RgbImage render_overlay(const Frame& frame, const std::vector<PointHeight>& heights) {
  RgbImage img = to_rgb(render_visual(frame));
  const RadarImage radar = render_radar_image(frame, heights);
  const auto owners = associate(frame);
  for (int i = 0; i < img.rows; ++i) {
    for (int j = 0; j < img.cols; ++j) {
      const int id = radar.point_id(i, j);
      if (id < 0) continue;
      const auto it = owners.find(id);
      img(i, j) = (it != owners.end() && it->second) ? kAssociatedColor : kUnassociatedColor;
    }
  }
  return img;
}

std::string encode_ppm(const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.cols) + " " + std::to_string(img.rows) + "\n255\n";
  out.reserve(out.size() + img.pixels.size() * 3);
  for (const auto& p : img.pixels) {
    out.push_back(static_cast<char>(p.r));
    out.push_back(static_cast<char>(p.g));
    out.push_back(static_cast<char>(p.b));
  }
  return out;
}

}  // namespace radar_height
