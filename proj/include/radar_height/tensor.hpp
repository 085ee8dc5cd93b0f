#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace radar_height {

/// Channel-major (C, H, W) tensor of doubles.
struct Tensor {
  int channels = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w, double fill = 0.0)
      : channels(c), rows(h), cols(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(rows) * cols; }

  double& at(int c, int i, int j) { return data[(static_cast<std::size_t>(c) * rows + i) * cols + j]; }
  double at(int c, int i, int j) const { return data[(static_cast<std::size_t>(c) * rows + i) * cols + j]; }

  std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const { return {data.data() + c * plane_size(), plane_size()}; }

  bool same_shape(const Tensor& o) const { return channels == o.channels && rows == o.rows && cols == o.cols; }
  bool operator==(const Tensor&) const = default;
};

}  // namespace radar_height
