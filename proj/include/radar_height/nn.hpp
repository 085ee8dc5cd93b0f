#pragma once

// Minimal layer kernels for the height model. Parameters live in one flat
// vector; each layer records where its weights and bias start.

#include <span>

#include "radar_height/tensor.hpp"

namespace radar_height::nn {

/// Square-kernel convolution with zero padding kernel/2.
/// Weights are laid out (out, in, k, k) followed by `out` biases.
struct Conv2d {
  int in = 0;
  int out = 0;
  int kernel = 1;
  int stride = 1;
  std::size_t offset = 0;

  std::size_t weight_count() const { return static_cast<std::size_t>(out) * in * kernel * kernel; }
  std::size_t param_count() const { return weight_count() + out; }
  int fan_in() const { return in * kernel * kernel; }
  int out_size(int n) const { return (n + 2 * (kernel / 2) - kernel) / stride + 1; }
};

/// out = conv(in) (+bias). `out` is resized.
void conv_forward(const Conv2d& layer, std::span<const double> params, const Tensor& in, Tensor& out);

/// Accumulates parameter gradients into `grad_params` and, when `grad_in` is
/// non-null, input gradients into `*grad_in` (which must already have in's shape).
void conv_backward(const Conv2d& layer, std::span<const double> params, const Tensor& in,
                   const Tensor& grad_out, std::span<double> grad_params, Tensor* grad_in);

/// Bilinear resize with half-pixel centers and edge clamping.
void upsample_bilinear(const Tensor& in, int rows, int cols, Tensor& out);

/// Adjoint of upsample_bilinear: accumulates into `grad_in` (shape of the original input).
void upsample_bilinear_backward(const Tensor& grad_out, Tensor& grad_in);

void relu_inplace(Tensor& t);

/// grad *= (activation > 0)
void relu_backward_inplace(const Tensor& activation, Tensor& grad);

double softplus(double z);
double sigmoid(double z);

}  // namespace radar_height::nn
