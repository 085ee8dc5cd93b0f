#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "radar_height/model.hpp"
#include "radar_height/rng.hpp"
#include "radar_height/synth.hpp"
#include "radar_height/trainer.hpp"

using namespace radar_height;

namespace {

Targets targets_of(const Sample& s) { return {&s.gt.heights, &s.gt.partition, &s.mask}; }

// Heads and all biases drawn at random. With zero biases an empty radar image
// leaves pre-activations at exactly 0, right on the ReLU kink.
ToyModelParams params_with_live_heads(std::uint64_t seed) {
  ToyModelParams p = init_params(ModelShape{}, seed);
  Rng rng(seed + 100);
  const ModelLayout layout = p.layout();
  for (const auto& named : layout.layers()) {
    const std::size_t first = named.is_head ? 0 : named.layer.weight_count();
    for (std::size_t k = first; k < named.layer.param_count(); ++k) p.values[named.layer.offset + k] = rng.uniform(-0.3, 0.3);
  }
  return p;
}

Sample default_sample(int index) { return make_sample(generate_frame(SceneSpec{}, index)); }

}  // namespace

TEST_CASE("layout covers every parameter once") {
  const ModelLayout layout = ModelLayout::make(ModelShape{});
  std::size_t expected = 0;
  int heads = 0;
  for (const auto& named : layout.layers()) {
    CHECK(named.layer.offset == expected);
    expected += named.layer.param_count();
    heads += named.is_head;
  }
  CHECK(expected == layout.total);
  CHECK(heads == 2);
  CHECK(layout.height_head.in == 2 * ModelShape{}.features);
  CHECK(layout.seg_head.in == 2 * ModelShape{}.features);
  CHECK(layout.seg_head.out == 2);
  CHECK(layout.total > 10000);
  CHECK(layout.total < 100000);
}

TEST_CASE("zero inputs and zero heads give softplus(0) heights and 0.5 masks") {
  const ModelShape shape;
  const ToyModelParams p = init_params(shape, 5);
  ModelInput in{Tensor(3, shape.rows, shape.cols), Tensor(4, shape.rows, shape.cols)};
  const Prediction pred = forward(p, in);
  CHECK(pred.height.rows() == shape.rows);
  CHECK(pred.height.cols() == shape.cols);
  for (double v : pred.height.values()) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  for (double v : pred.seg.free_space.values()) CHECK(v == 0.5);
  for (double v : pred.seg.occupied.values()) CHECK(v == 0.5);
}

TEST_CASE("forward is deterministic, shaped, and non-negative") {
  const Sample s = default_sample(3);
  const ToyModelParams p = params_with_live_heads(9);
  const Prediction a = forward(p, s.input);
  const Prediction b = forward(p, s.input);
  CHECK(a.height == b.height);
  CHECK(a.seg == b.seg);
  CHECK(a.seg.free_space.rows() == 64);
  CHECK(a.seg.occupied.cols() == 96);

  ToyModelParams negative = p;
  const ModelLayout layout = p.layout();
  negative.values[layout.height_head.offset + layout.height_head.weight_count()] = -1e3;
  for (double v : forward(negative, s.input).height.values()) CHECK(v >= 0.0);
  for (double v : a.seg.free_space.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("shape mismatch is rejected") {
  const ToyModelParams p = init_params(ModelShape{}, 1);
  ModelInput in{Tensor(3, 32, 96), Tensor(4, 64, 96)};
  CHECK_THROWS_AS(forward(p, in), std::invalid_argument);
  in.visual = Tensor(3, 64, 96);
  in.radar = Tensor(3, 64, 96);
  CHECK_THROWS_AS(forward(p, in), std::invalid_argument);
}

TEST_CASE("backward matches central differences on random parameters at 64x96") {
  const Sample s = default_sample(7);
  ToyModelParams p = params_with_live_heads(11);
  ObjectiveOptions objective;  // EHL plus segmentation
  std::vector<double> grad(p.values.size(), 0.0);
  const LossBreakdown base = backward(p, s.input, targets_of(s), objective, grad);
  CHECK(base.total == evaluate_loss(p, s.input, targets_of(s), objective).total);

  Rng rng(12);
  std::vector<std::size_t> picks;
  for (const auto& named : p.layout().layers()) {
    for (int k = 0; k < 4; ++k) picks.push_back(named.layer.offset + rng.uniform_int(0, named.layer.param_count() - 1));
  }
  REQUIRE(picks.size() >= 50);

  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t idx : picks) {
    const double keep = p.values[idx];
    p.values[idx] = keep + h;
    const double up = evaluate_loss(p, s.input, targets_of(s), objective).total;
    p.values[idx] = keep - h;
    const double down = evaluate_loss(p, s.input, targets_of(s), objective).total;
    p.values[idx] = keep;
    const double fd = (up - down) / (2 * h);
    const double rel = std::abs(grad[idx] - fd) / std::max({std::abs(grad[idx]), std::abs(fd), 1e-6});
    worst = std::max(worst, rel);
  }
  MESSAGE("worst relative error " << worst);
  CHECK(worst <= 1e-4);
}

TEST_CASE("perfect height targets leave no regression gradient") {
  Sample s = default_sample(2);
  const ToyModelParams p = params_with_live_heads(13);
  s.gt.heights = forward(p, s.input).height;
  ObjectiveOptions objective;
  objective.use_seg = false;
  std::vector<double> grad(p.values.size(), 0.0);
  const LossBreakdown b = backward(p, s.input, targets_of(s), objective, grad);
  CHECK(b.reg.l_reg == 0.0);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("with gamma = 0 radar-pixel errors do not move the gradient") {
  Sample s = default_sample(4);
  const ToyModelParams p = params_with_live_heads(14);
  ObjectiveOptions objective;
  objective.loss.gamma = 0.0;
  std::vector<double> g1(p.values.size(), 0.0), g2(p.values.size(), 0.0);
  backward(p, s.input, targets_of(s), objective, g1);
  int changed = 0;
  for (int i = 0; i < s.gt.heights.rows(); ++i) {
    for (int j = 0; j < s.gt.heights.cols(); ++j) {
      if (s.gt.partition(i, j) != Region::kRadar) continue;
      s.gt.heights(i, j) += 5.0;
      ++changed;
    }
  }
  REQUIRE(changed > 0);
  backward(p, s.input, targets_of(s), objective, g2);
  CHECK(g1 == g2);
}

TEST_CASE("backward accumulates into the gradient buffer") {
  const Sample s = default_sample(5);
  const ToyModelParams p = params_with_live_heads(15);
  std::vector<double> once(p.values.size(), 0.0), twice(p.values.size(), 0.0);
  backward(p, s.input, targets_of(s), ObjectiveOptions{}, once);
  backward(p, s.input, targets_of(s), ObjectiveOptions{}, twice);
  backward(p, s.input, targets_of(s), ObjectiveOptions{}, twice);
  for (std::size_t k = 0; k < once.size(); ++k) CHECK(twice[k] == 2.0 * once[k]);
}
