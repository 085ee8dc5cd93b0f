#include "radar_height/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace radar_height::nn {

namespace {

// Output columns x whose source column x*stride + kx - pad lies in [0, in_cols).
std::pair<int, int> valid_range(int in_size, int out_size, int stride, int offset) {
  // offset = k - pad; need 0 <= x*stride + offset < in_size
  int lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  int hi = (in_size - 1 - offset) >= 0 ? (in_size - 1 - offset) / stride : -1;
  hi = std::min(hi, out_size - 1);
  return {lo, hi};
}

struct Tap {
  int i0;
  int i1;
  double f;
};

std::vector<Tap> bilinear_taps(int in_size, int out_size) {
  std::vector<Tap> taps(static_cast<std::size_t>(out_size));
  const double scale = static_cast<double>(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    int i0 = static_cast<int>(std::floor(src));
    if (i0 >= in_size - 1) {
      taps[o] = {in_size - 1, in_size - 1, 0.0};
    } else {
      taps[o] = {i0, i0 + 1, src - i0};
    }
  }
  return taps;
}

}  // namespace

void conv_forward(const Conv2d& layer, std::span<const double> params, const Tensor& in, Tensor& out) {
  if (in.channels != layer.in) throw std::invalid_argument("conv_forward: channel mismatch");
  const int pad = layer.kernel / 2;
  const int oh = layer.out_size(in.rows);
  const int ow = layer.out_size(in.cols);
  out = Tensor(layer.out, oh, ow);
  const double* w = params.data() + layer.offset;
  const double* bias = w + layer.weight_count();
  const int k = layer.kernel;
  const int s = layer.stride;

  for (int oc = 0; oc < layer.out; ++oc) {
    auto dst = out.plane(oc);
    std::fill(dst.begin(), dst.end(), bias[oc]);
    for (int ic = 0; ic < layer.in; ++ic) {
      const auto src = in.plane(ic);
      for (int ky = 0; ky < k; ++ky) {
        const auto [y_lo, y_hi] = valid_range(in.rows, oh, s, ky - pad);
        for (int kx = 0; kx < k; ++kx) {
          const double wv = w[((static_cast<std::size_t>(oc) * layer.in + ic) * k + ky) * k + kx];
          const auto [x_lo, x_hi] = valid_range(in.cols, ow, s, kx - pad);
          for (int y = y_lo; y <= y_hi; ++y) {
            const double* srow = src.data() + static_cast<std::size_t>(y * s + ky - pad) * in.cols;
            double* drow = dst.data() + static_cast<std::size_t>(y) * ow;
            const int off = kx - pad;
            if (s == 1) {
              for (int x = x_lo; x <= x_hi; ++x) drow[x] += wv * srow[x + off];
            } else {
              for (int x = x_lo; x <= x_hi; ++x) drow[x] += wv * srow[x * s + off];
            }
          }
        }
      }
    }
  }
}

void conv_backward(const Conv2d& layer, std::span<const double> params, const Tensor& in,
                   const Tensor& grad_out, std::span<double> grad_params, Tensor* grad_in) {
  const int pad = layer.kernel / 2;
  const int oh = grad_out.rows;
  const int ow = grad_out.cols;
  const double* w = params.data() + layer.offset;
  double* gw = grad_params.data() + layer.offset;
  double* gb = gw + layer.weight_count();
  const int k = layer.kernel;
  const int s = layer.stride;

  for (int oc = 0; oc < layer.out; ++oc) {
    const auto g = grad_out.plane(oc);
    double bsum = 0.0;
    for (double v : g) bsum += v;
    gb[oc] += bsum;
    for (int ic = 0; ic < layer.in; ++ic) {
      const auto src = in.plane(ic);
      double* gsrc = grad_in ? grad_in->plane(ic).data() : nullptr;
      for (int ky = 0; ky < k; ++ky) {
        const auto [y_lo, y_hi] = valid_range(in.rows, oh, s, ky - pad);
        for (int kx = 0; kx < k; ++kx) {
          const std::size_t widx = ((static_cast<std::size_t>(oc) * layer.in + ic) * k + ky) * k + kx;
          const double wv = w[widx];
          const auto [x_lo, x_hi] = valid_range(in.cols, ow, s, kx - pad);
          double acc = 0.0;
          for (int y = y_lo; y <= y_hi; ++y) {
            const std::size_t row_off = static_cast<std::size_t>(y * s + ky - pad) * in.cols;
            const double* srow = src.data() + row_off;
            const double* grow = g.data() + static_cast<std::size_t>(y) * ow;
            const int off = kx - pad;
            if (s == 1) {
              for (int x = x_lo; x <= x_hi; ++x) acc += grow[x] * srow[x + off];
              if (gsrc) {
                double* girow = gsrc + row_off;
                for (int x = x_lo; x <= x_hi; ++x) girow[x + off] += wv * grow[x];
              }
            } else {
              for (int x = x_lo; x <= x_hi; ++x) acc += grow[x] * srow[x * s + off];
              if (gsrc) {
                double* girow = gsrc + row_off;
                for (int x = x_lo; x <= x_hi; ++x) girow[x * s + off] += wv * grow[x];
              }
            }
          }
          gw[widx] += acc;
        }
      }
    }
  }
}

void upsample_bilinear(const Tensor& in, int rows, int cols, Tensor& out) {
  out = Tensor(in.channels, rows, cols);
  const auto ty = bilinear_taps(in.rows, rows);
  const auto tx = bilinear_taps(in.cols, cols);
  for (int c = 0; c < in.channels; ++c) {
    const auto src = in.plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < rows; ++y) {
      const Tap& a = ty[y];
      const double* r0 = src.data() + static_cast<std::size_t>(a.i0) * in.cols;
      const double* r1 = src.data() + static_cast<std::size_t>(a.i1) * in.cols;
      double* d = dst.data() + static_cast<std::size_t>(y) * cols;
      for (int x = 0; x < cols; ++x) {
        const Tap& b = tx[x];
        const double top = (1.0 - b.f) * r0[b.i0] + b.f * r0[b.i1];
        const double bot = (1.0 - b.f) * r1[b.i0] + b.f * r1[b.i1];
        d[x] = (1.0 - a.f) * top + a.f * bot;
      }
    }
  }
}

void upsample_bilinear_backward(const Tensor& grad_out, Tensor& grad_in) {
  const auto ty = bilinear_taps(grad_in.rows, grad_out.rows);
  const auto tx = bilinear_taps(grad_in.cols, grad_out.cols);
  for (int c = 0; c < grad_out.channels; ++c) {
    const auto g = grad_out.plane(c);
    auto dst = grad_in.plane(c);
    for (int y = 0; y < grad_out.rows; ++y) {
      const Tap& a = ty[y];
      double* r0 = dst.data() + static_cast<std::size_t>(a.i0) * grad_in.cols;
      double* r1 = dst.data() + static_cast<std::size_t>(a.i1) * grad_in.cols;
      const double* gr = g.data() + static_cast<std::size_t>(y) * grad_out.cols;
      for (int x = 0; x < grad_out.cols; ++x) {
        const Tap& b = tx[x];
        const double top = (1.0 - a.f) * gr[x];
        const double bot = a.f * gr[x];
        r0[b.i0] += (1.0 - b.f) * top;
        r0[b.i1] += b.f * top;
        r1[b.i0] += (1.0 - b.f) * bot;
        r1[b.i1] += b.f * bot;
      }
    }
  }
}

void relu_inplace(Tensor& t) {
  for (double& v : t.data) v = v > 0.0 ? v : 0.0;
}

void relu_backward_inplace(const Tensor& activation, Tensor& grad) {
  for (std::size_t k = 0; k < grad.data.size(); ++k) {
    if (!(activation.data[k] > 0.0)) grad.data[k] = 0.0;
  }
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace radar_height::nn
