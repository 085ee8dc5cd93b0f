#include "radar_height/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "radar_height/errors.hpp"
#include "radar_height/rng.hpp"
#include "radar_height/synth.hpp"

namespace radar_height {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-7;

struct Adam {
  std::vector<double> m;
  std::vector<double> v;
  long long step = 0;

  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void update(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    ++step;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
    for (std::size_t k = 0; k < params.size(); ++k) {
      m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * grad[k];
      v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * grad[k] * grad[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      params[k] -= lr * mhat / (std::sqrt(vhat) + kAdamEpsilon);
    }
  }
};

void accumulate(LossMeans& acc, const LossBreakdown& b) {
  acc.l_bg += b.reg.l_bg;
  acc.l_fg += b.reg.l_fg;
  acc.l_rad += b.reg.l_rad;
  acc.l_reg += b.reg.l_reg;
  acc.seg += b.seg;
  acc.total += b.total;
}

void divide(LossMeans& acc, std::size_t n) {
  if (n == 0) return;
  const auto d = static_cast<double>(n);
  acc.l_bg /= d;
  acc.l_fg /= d;
  acc.l_rad /= d;
  acc.l_reg /= d;
  acc.seg /= d;
  acc.total /= d;
}

Targets targets_of(const Sample& s) { return {&s.gt.heights, &s.gt.partition, &s.mask}; }

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each i writes only its own slot.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(n))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

void validate(const TrainConfig& cfg) {
  validate(cfg.loss);
  if (!(cfg.lr > 0.0)) throw ConfigError("train.lr must be > 0");
  if (!(cfg.lr_decay > 0.0 && cfg.lr_decay < 1.0)) throw ConfigError("train.lr_decay must be in (0, 1)");
  if (cfg.plateau_patience < 1) throw ConfigError("train.plateau_patience must be >= 1");
  if (cfg.epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (cfg.threads < 1) throw ConfigError("train.threads must be >= 1");
  if (!(cfg.seg_weight >= 0.0)) throw ConfigError("train.seg_weight must be >= 0");
  const ModelShape& s = cfg.shape;
  if (s.rows < 4 || s.cols < 4 || s.c1 < 1 || s.c2 < 1 || s.c3 < 1 || s.features < 1) {
    throw ConfigError("train.model: dims and channel counts must be positive (image at least 4x4)");
  }
}

Sample make_sample(const Frame& frame) {
  Sample s;
  s.frame_id = frame.id;
  s.input.visual = render_visual(frame);
  std::vector<PointHeight> flat;
  flat.reserve(frame.radar.size());
  for (const auto& p : frame.radar) flat.push_back({p.id, 0.0});
  s.input.radar = radar_input_tensor(render_radar_image(frame, flat));
  s.gt = build_height_map(frame);
  s.mask = build_seg_mask(frame);
  return s;
}

std::vector<Sample> make_samples(const std::vector<Frame>& frames) {
  std::vector<Sample> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(make_sample(f));
  return out;
}

ObjectiveOptions objective_of(const TrainConfig& cfg) { return {cfg.loss, cfg.seg_weight, cfg.use_seg}; }

LossMeans mean_loss(const ToyModelParams& params, const std::vector<Sample>& samples, const ObjectiveOptions& objective) {
  LossMeans acc;
  for (const auto& s : samples) accumulate(acc, evaluate_loss(params, s.input, targets_of(s), objective));
  divide(acc, samples.size());
  return acc;
}

TrainResult train(const TrainConfig& cfg, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  validate(cfg);
  if (train_set.empty()) throw ConfigError("train: empty training set");
  if (val_set.empty()) throw ConfigError("train: empty validation set");

  const ObjectiveOptions objective = objective_of(cfg);
  TrainResult result;
  result.params = init_params(cfg.shape, derive_seed(cfg.seed, 1));
  const std::size_t n_params = result.params.values.size();
  Adam adam(n_params);
  Rng order_rng(derive_seed(cfg.seed, 2));

  double lr = cfg.lr;
  EpochRecord initial;
  initial.epoch = 0;
  initial.lr = lr;
  initial.val = mean_loss(result.params, val_set, objective);
  result.log.push_back(initial);
  if (on_epoch) on_epoch(initial);

  double best_val = initial.val.l_reg;
  int stale = 0;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::vector<double>> item_grads(batch, std::vector<double>(n_params));
  std::vector<LossBreakdown> item_losses(batch);
  std::vector<double> grad(n_params);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    LossMeans train_acc;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      parallel_for(count, cfg.threads, [&](std::size_t i) {
        std::fill(item_grads[i].begin(), item_grads[i].end(), 0.0);
        const Sample& s = train_set[order[start + i]];
        item_losses[i] = backward(result.params, s.input, targets_of(s), objective, item_grads[i]);
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t k = 0; k < n_params; ++k) grad[k] += item_grads[i][k];
        accumulate(train_acc, item_losses[i]);
      }
      const double inv = 1.0 / static_cast<double>(count);
      for (double& g : grad) g *= inv;
      for (double g : grad) {
        if (!std::isfinite(g)) throw NumericError("non-finite gradient at epoch " + std::to_string(epoch));
      }
      adam.update(result.params.values, grad, lr);
    }
    divide(train_acc, order.size());

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train = train_acc;
    rec.val = mean_loss(result.params, val_set, objective);
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val.l_reg < best_val) {
      best_val = rec.val.l_reg;
      stale = 0;
    } else if (++stale >= cfg.plateau_patience) {
      lr *= cfg.lr_decay;
      stale = 0;
    }
  }
  return result;
}

PredictionStore predict_dataset(const ToyModelParams& params, const std::vector<Sample>& samples,
                                const std::vector<Frame>& frames) {
  if (samples.size() != frames.size()) throw std::invalid_argument("predict_dataset: samples and frames differ");
  PredictionStore store;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Prediction pred = forward(params, samples[f].input);
    std::vector<PointPrediction> points;
    for (const auto& p : project_radar(frames[f]).points) {
      points.push_back({p.id, p.pixel, pred.height(p.pixel.row, p.pixel.col)});
    }
    store.put(frames[f].id, std::move(points));
  }
  return store;
}

PredictionStore oracle_predictions(const std::vector<Frame>& frames) {
  PredictionStore store;
  for (const auto& frame : frames) {
    const GroundTruth gt = build_height_map(frame);
    std::vector<PointPrediction> points;
    for (const auto& p : project_radar(frame).points) {
      points.push_back({p.id, p.pixel, gt.heights(p.pixel.row, p.pixel.col)});
    }
    store.put(frame.id, std::move(points));
  }
  return store;
}

std::vector<HeightErrorReport> evaluate_height(const ToyModelParams& params, const std::vector<Sample>& samples) {
  std::vector<HeightErrorReport> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const Prediction pred = forward(params, s.input);
    out.push_back(height_errors(s.gt.heights, pred.height, s.gt.partition));
  }
  return out;
}

CollapseStats collapse_stats(const ToyModelParams& params, const std::vector<Sample>& samples,
                             const std::vector<Frame>& frames) {
  double pred_sum = 0.0;
  long long pred_n = 0;
  for (const auto& s : samples) {
    const Prediction pred = forward(params, s.input);
    const auto p = pred.height.values();
    const auto r = s.gt.partition.values();
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (r[k] == Region::kRadar) {
        pred_sum += std::abs(p[k]);
        ++pred_n;
      }
    }
  }
  double h_sum = 0.0;
  long long h_n = 0;
  for (const auto& f : frames) {
    for (const auto& b : f.objects) {
      h_sum += b.size.height;
      ++h_n;
    }
  }
  CollapseStats out;
  out.mean_pred_at_radar = pred_n ? pred_sum / static_cast<double>(pred_n) : 0.0;
  out.mean_object_height = h_n ? h_sum / static_cast<double>(h_n) : 0.0;
  out.ratio = out.mean_object_height > 0.0 ? out.mean_pred_at_radar / out.mean_object_height : 0.0;
  return out;
}

}  // namespace radar_height
