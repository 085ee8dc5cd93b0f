#include "radar_height/model.hpp"

#include <cmath>
#include <stdexcept>

#include "radar_height/rng.hpp"

namespace radar_height {

namespace {

constexpr double kRcsScale = 20.0;
constexpr double kDistanceScale = 50.0;
constexpr double kVelocityScale = 10.0;

nn::Conv2d conv(int in, int out, int kernel, int stride, std::size_t& offset) {
  nn::Conv2d c{in, out, kernel, stride, offset};
  offset += c.param_count();
  return c;
}

EncoderLayers make_encoder(const ModelShape& s, int in_channels, std::size_t& offset) {
  EncoderLayers e;
  e.conv1 = conv(in_channels, s.c1, 3, 1, offset);
  e.conv2 = conv(s.c1, s.c2, 3, 2, offset);
  e.conv3 = conv(s.c2, s.c3, 3, 2, offset);
  e.lateral1 = conv(s.c1, s.features, 1, 1, offset);
  e.lateral2 = conv(s.c2, s.features, 1, 1, offset);
  e.lateral3 = conv(s.c3, s.features, 1, 1, offset);
  return e;
}

struct EncoderCache {
  Tensor a1, a2, a3;
  Tensor p;
};

struct ForwardCache {
  EncoderCache camera;
  EncoderCache radar;
  Tensor concat;
  Tensor height_logits;
  Tensor seg_logits;
};

void add_upsampled(const Tensor& low, Tensor& acc) {
  Tensor up;
  nn::upsample_bilinear(low, acc.rows, acc.cols, up);
  for (std::size_t k = 0; k < acc.data.size(); ++k) acc.data[k] += up.data[k];
}

void encode(const EncoderLayers& e, std::span<const double> w, const Tensor& x, EncoderCache& c) {
  nn::conv_forward(e.conv1, w, x, c.a1);
  nn::relu_inplace(c.a1);
  nn::conv_forward(e.conv2, w, c.a1, c.a2);
  nn::relu_inplace(c.a2);
  nn::conv_forward(e.conv3, w, c.a2, c.a3);
  nn::relu_inplace(c.a3);

  nn::conv_forward(e.lateral1, w, c.a1, c.p);
  Tensor t;
  nn::conv_forward(e.lateral2, w, c.a2, t);
  add_upsampled(t, c.p);
  nn::conv_forward(e.lateral3, w, c.a3, t);
  add_upsampled(t, c.p);
  nn::relu_inplace(c.p);
}

void encode_backward(const EncoderLayers& e, std::span<const double> w, const Tensor& x, const EncoderCache& c,
                     Tensor dp, std::span<double> grad) {
  nn::relu_backward_inplace(c.p, dp);

  Tensor da1(c.a1.channels, c.a1.rows, c.a1.cols);
  Tensor da2(c.a2.channels, c.a2.rows, c.a2.cols);
  Tensor da3(c.a3.channels, c.a3.rows, c.a3.cols);

  nn::conv_backward(e.lateral1, w, c.a1, dp, grad, &da1);
  Tensor dt(dp.channels, c.a2.rows, c.a2.cols);
  nn::upsample_bilinear_backward(dp, dt);
  nn::conv_backward(e.lateral2, w, c.a2, dt, grad, &da2);
  dt = Tensor(dp.channels, c.a3.rows, c.a3.cols);
  nn::upsample_bilinear_backward(dp, dt);
  nn::conv_backward(e.lateral3, w, c.a3, dt, grad, &da3);

  nn::relu_backward_inplace(c.a3, da3);
  nn::conv_backward(e.conv3, w, c.a2, da3, grad, &da2);
  nn::relu_backward_inplace(c.a2, da2);
  nn::conv_backward(e.conv2, w, c.a1, da2, grad, &da1);
  nn::relu_backward_inplace(c.a1, da1);
  nn::conv_backward(e.conv1, w, x, da1, grad, nullptr);
}

Prediction run_forward(const ToyModelParams& params, const ModelInput& input, ForwardCache& c) {
  check_input(params.shape, input);
  const ModelLayout layout = params.layout();
  if (params.values.size() != layout.total) throw std::invalid_argument("forward: parameter count mismatch");
  const std::span<const double> w = params.values;

  encode(layout.camera, w, input.visual, c.camera);
  encode(layout.radar, w, input.radar, c.radar);

  const int f = params.shape.features;
  c.concat = Tensor(2 * f, params.shape.rows, params.shape.cols);
  const std::size_t plane = c.concat.plane_size();
  std::copy(c.camera.p.data.begin(), c.camera.p.data.end(), c.concat.data.begin());
  std::copy(c.radar.p.data.begin(), c.radar.p.data.end(), c.concat.data.begin() + static_cast<std::ptrdiff_t>(f * plane));

  nn::conv_forward(layout.height_head, w, c.concat, c.height_logits);
  nn::conv_forward(layout.seg_head, w, c.concat, c.seg_logits);

  Prediction out;
  out.height = HeightMap(params.shape.rows, params.shape.cols);
  out.seg = SegMask{Grid<double>(params.shape.rows, params.shape.cols), Grid<double>(params.shape.rows, params.shape.cols)};
  auto h = out.height.values();
  auto s0 = out.seg.free_space.values();
  auto s1 = out.seg.occupied.values();
  const auto zh = c.height_logits.plane(0);
  const auto zs0 = c.seg_logits.plane(0);
  const auto zs1 = c.seg_logits.plane(1);
  for (std::size_t k = 0; k < plane; ++k) {
    h[k] = nn::softplus(zh[k]);
    s0[k] = nn::sigmoid(zs0[k]);
    s1[k] = nn::sigmoid(zs1[k]);
  }
  return out;
}

void check_targets(const ModelShape& shape, const Targets& t) {
  if (!t.heights || !t.partition || !t.mask) throw std::invalid_argument("targets incomplete");
  if (t.heights->rows() != shape.rows || t.heights->cols() != shape.cols) {
    throw std::invalid_argument("target dims do not match the model");
  }
}

}  // namespace

ModelLayout ModelLayout::make(const ModelShape& shape) {
  ModelLayout l;
  l.shape = shape;
  std::size_t offset = 0;
  l.camera = make_encoder(shape, shape.visual_channels, offset);
  l.radar = make_encoder(shape, shape.radar_channels, offset);
  l.height_head = conv(2 * shape.features, 1, 1, 1, offset);
  l.seg_head = conv(2 * shape.features, 2, 1, 1, offset);
  l.total = offset;
  return l;
}

std::vector<NamedLayer> ModelLayout::layers() const {
  std::vector<NamedLayer> out;
  auto add_encoder = [&](const std::string& prefix, const EncoderLayers& e) {
    out.push_back({prefix + ".conv1", e.conv1});
    out.push_back({prefix + ".conv2", e.conv2});
    out.push_back({prefix + ".conv3", e.conv3});
    out.push_back({prefix + ".lateral1", e.lateral1});
    out.push_back({prefix + ".lateral2", e.lateral2});
    out.push_back({prefix + ".lateral3", e.lateral3});
  };
  add_encoder("camera", camera);
  add_encoder("radar", radar);
  out.push_back({"height_head", height_head, true});
  out.push_back({"seg_head", seg_head, true});
  return out;
}

ToyModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  ToyModelParams p;
  p.shape = shape;
  const ModelLayout layout = ModelLayout::make(shape);
  p.values.assign(layout.total, 0.0);
  Rng rng(seed);
  for (const auto& named : layout.layers()) {
    if (named.is_head) continue;
    const double limit = std::sqrt(6.0 / named.layer.fan_in());
    for (std::size_t k = 0; k < named.layer.weight_count(); ++k) {
      p.values[named.layer.offset + k] = rng.uniform(-limit, limit);
    }
  }
  return p;
}

Tensor radar_input_tensor(const RadarImage& img) {
  Tensor t(4, img.rows(), img.cols());
  const Grid<double>* channels[4] = {&img.rcs, &img.distance, &img.vx, &img.vy};
  const double scale[4] = {kRcsScale, kDistanceScale, kVelocityScale, kVelocityScale};
  for (int c = 0; c < 4; ++c) {
    const auto src = channels[c]->values();
    auto dst = t.plane(c);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] / scale[c];
  }
  return t;
}

void check_input(const ModelShape& shape, const ModelInput& input) {
  if (input.visual.channels != shape.visual_channels || input.visual.rows != shape.rows ||
      input.visual.cols != shape.cols) {
    throw std::invalid_argument("visual input shape does not match the model");
  }
  if (input.radar.channels != shape.radar_channels || input.radar.rows != shape.rows ||
      input.radar.cols != shape.cols) {
    throw std::invalid_argument("radar input shape does not match the model");
  }
}

Prediction forward(const ToyModelParams& params, const ModelInput& input) {
  ForwardCache cache;
  return run_forward(params, input, cache);
}

LossBreakdown evaluate_loss(const ToyModelParams& params, const ModelInput& input, const Targets& targets,
                            const ObjectiveOptions& objective) {
  check_targets(params.shape, targets);
  const Prediction pred = forward(params, input);
  LossBreakdown out;
  out.reg = region_loss(objective.loss, *targets.heights, pred.height, *targets.partition);
  out.seg = seg_bce(pred.seg, *targets.mask);
  out.total = total_loss(out.reg, objective.use_seg ? out.seg : 0.0, objective.seg_weight);
  return out;
}

LossBreakdown backward(const ToyModelParams& params, const ModelInput& input, const Targets& targets,
                       const ObjectiveOptions& objective, std::span<double> grad) {
  check_targets(params.shape, targets);
  if (grad.size() != params.values.size()) throw std::invalid_argument("backward: gradient size mismatch");
  ForwardCache c;
  const Prediction pred = run_forward(params, input, c);
  const ModelLayout layout = params.layout();
  const std::span<const double> w = params.values;

  LossBreakdown out;
  HeightMap dh;
  out.reg = region_loss_with_grad(objective.loss, *targets.heights, pred.height, *targets.partition, dh);
  SegMask ds;
  out.seg = seg_bce_with_grad(pred.seg, *targets.mask, ds);
  out.total = total_loss(out.reg, objective.use_seg ? out.seg : 0.0, objective.seg_weight);

  const int rows = params.shape.rows;
  const int cols = params.shape.cols;
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;

  Tensor dzh(1, rows, cols);
  {
    const auto zh = c.height_logits.plane(0);
    const auto g = dh.values();
    auto d = dzh.plane(0);
    for (std::size_t k = 0; k < plane; ++k) d[k] = g[k] * nn::sigmoid(zh[k]);
  }
  Tensor dconcat(c.concat.channels, rows, cols);
  nn::conv_backward(layout.height_head, w, c.concat, dzh, grad, &dconcat);

  if (objective.use_seg) {
    Tensor dzs(2, rows, cols);
    const Grid<double>* probs[2] = {&pred.seg.free_space, &pred.seg.occupied};
    const Grid<double>* grads[2] = {&ds.free_space, &ds.occupied};
    for (int ch = 0; ch < 2; ++ch) {
      const auto p = probs[ch]->values();
      const auto g = grads[ch]->values();
      auto d = dzs.plane(ch);
      for (std::size_t k = 0; k < plane; ++k) d[k] = objective.seg_weight * g[k] * p[k] * (1.0 - p[k]);
    }
    nn::conv_backward(layout.seg_head, w, c.concat, dzs, grad, &dconcat);
  }

  const int f = params.shape.features;
  Tensor dp_cam(f, rows, cols);
  Tensor dp_rad(f, rows, cols);
  std::copy(dconcat.data.begin(), dconcat.data.begin() + static_cast<std::ptrdiff_t>(f * plane), dp_cam.data.begin());
  std::copy(dconcat.data.begin() + static_cast<std::ptrdiff_t>(f * plane), dconcat.data.end(), dp_rad.data.begin());

  encode_backward(layout.camera, w, input.visual, c.camera, std::move(dp_cam), grad);
  encode_backward(layout.radar, w, input.radar, c.radar, std::move(dp_rad), grad);
  return out;
}

}  // namespace radar_height
