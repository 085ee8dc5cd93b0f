#include "radar_height/loss.hpp"

#include <algorithm>
#include <cmath>

#include "radar_height/errors.hpp"
#include "radar_height/rng.hpp"

namespace radar_height {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kL1: return "l1";
    case LossKind::kL2: return "l2";
    case LossKind::kWL1: return "wl1";
    case LossKind::kWL2: return "wl2";
    case LossKind::kHuber: return "hl";
    case LossKind::kEHL: return "ehl";
  }
  return "?";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  for (auto k : {LossKind::kL1, LossKind::kL2, LossKind::kWL1, LossKind::kWL2, LossKind::kHuber, LossKind::kEHL}) {
    if (name == to_string(k)) return k;
  }
  if (name == "huber") return LossKind::kHuber;
  return std::nullopt;
}

void validate(const LossSpec& spec) {
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) throw ConfigError("loss.sigma must be > 0");
  for (double w : {spec.alpha, spec.beta, spec.gamma}) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("loss weights alpha/beta/gamma must be finite and >= 0");
  }
}

LossValue loss_of_error(const LossSpec& spec, double dh) {
  const double s2 = spec.sigma * spec.sigma;
  const double knee = 1.0 / s2;
  switch (spec.kind) {
    case LossKind::kL1:
      return {dh, dh > 0.0 ? 1.0 : 0.0};
    case LossKind::kL2:
      return {dh * dh, 2.0 * dh};
    case LossKind::kWL1: {
      const double w = std::log1p(dh);
      return {dh * w, w + dh / (dh + 1.0)};
    }
    case LossKind::kWL2: {
      const double w = std::log1p(dh);
      return {dh * dh * w, 2.0 * dh * w + dh * dh / (dh + 1.0)};
    }
    case LossKind::kHuber:
      if (dh < knee) return {0.5 * s2 * dh * dh, s2 * dh};
      return {dh - 0.5 * knee, 1.0};
    case LossKind::kEHL: {
      const double w = std::log1p(dh);
      if (dh < knee) {
        const double base = 0.5 * s2 * dh * dh;
        return {base * w, s2 * dh * w + base / (dh + 1.0)};
      }
      const double base = dh - 0.5 * knee;
      return {base * w, w + base / (dh + 1.0)};
    }
  }
  return {};
}

LossValue pointwise_loss(const LossSpec& spec, double h_true, double h_pred) {
  const double diff = h_pred - h_true;
  const LossValue l = loss_of_error(spec, std::abs(diff));
  if (diff == 0.0) return {l.value, 0.0};
  return {l.value, diff > 0.0 ? l.grad : -l.grad};
}

namespace {

struct RegionSums {
  double sum[3] = {0.0, 0.0, 0.0};
  long long count[3] = {0, 0, 0};
};

void check_dims(const HeightMap& gt, const HeightMap& pred, const RegionPartition& part) {
  if (!gt.same_shape(pred) || !gt.same_shape(part)) {
    throw std::invalid_argument("region_loss: gt, pred and partition dims differ");
  }
}

RegionLosses compose(const LossSpec& spec, const RegionSums& s) {
  auto mean = [&](int r) { return s.count[r] ? s.sum[r] / static_cast<double>(s.count[r]) : 0.0; };
  RegionLosses out;
  out.l_bg = mean(0);
  out.l_fg = mean(1);
  out.l_rad = mean(2);
  out.l_reg = spec.alpha * out.l_bg + spec.beta * out.l_fg + spec.gamma * out.l_rad;
  return out;
}

}  // namespace

RegionLosses region_loss(const LossSpec& spec, const HeightMap& gt, const HeightMap& pred,
                         const RegionPartition& part) {
  check_dims(gt, pred, part);
  RegionSums s;
  const auto g = gt.values();
  const auto p = pred.values();
  const auto r = part.values();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const int region = static_cast<int>(r[k]);
    s.sum[region] += pointwise_loss(spec, g[k], p[k]).value;
    ++s.count[region];
  }
  return compose(spec, s);
}

RegionLosses region_loss_with_grad(const LossSpec& spec, const HeightMap& gt, const HeightMap& pred,
                                   const RegionPartition& part, HeightMap& grad) {
  check_dims(gt, pred, part);
  grad = HeightMap(gt.rows(), gt.cols(), 0.0);
  RegionSums s;
  const auto g = gt.values();
  const auto p = pred.values();
  const auto r = part.values();
  auto dg = grad.values();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const int region = static_cast<int>(r[k]);
    const LossValue l = pointwise_loss(spec, g[k], p[k]);
    s.sum[region] += l.value;
    ++s.count[region];
    dg[k] = l.grad;
  }
  const double weights[3] = {spec.alpha, spec.beta, spec.gamma};
  double scale[3];
  for (int i = 0; i < 3; ++i) scale[i] = s.count[i] ? weights[i] / static_cast<double>(s.count[i]) : 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) dg[k] *= scale[static_cast<int>(r[k])];
  return compose(spec, s);
}

namespace {

double bce_term(double p, double y) {
  const double q = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double bce_grad(double p, double y) {
  if (p < kBceClamp || p > 1.0 - kBceClamp) return 0.0;
  return -y / p + (1.0 - y) / (1.0 - p);
}

void check_mask_dims(const SegMask& a, const SegMask& b) {
  if (!a.free_space.same_shape(b.free_space) || !a.occupied.same_shape(b.occupied) ||
      !a.free_space.same_shape(a.occupied)) {
    throw std::invalid_argument("seg_bce: mask dims differ");
  }
}

}  // namespace

double seg_bce(const SegMask& pred, const SegMask& gt) {
  check_mask_dims(pred, gt);
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.free_space.size(); ++k) sum += bce_term(pred.free_space.values()[k], gt.free_space.values()[k]);
  for (std::size_t k = 0; k < pred.occupied.size(); ++k) sum += bce_term(pred.occupied.values()[k], gt.occupied.values()[k]);
  const auto n = static_cast<double>(pred.free_space.size() + pred.occupied.size());
  return n > 0 ? sum / n : 0.0;
}

double seg_bce_with_grad(const SegMask& pred, const SegMask& gt, SegMask& grad) {
  check_mask_dims(pred, gt);
  const auto n = static_cast<double>(pred.free_space.size() + pred.occupied.size());
  grad = SegMask{Grid<double>(pred.free_space.rows(), pred.free_space.cols(), 0.0),
                 Grid<double>(pred.occupied.rows(), pred.occupied.cols(), 0.0)};
  double sum = 0.0;
  auto channel = [&](const Grid<double>& p, const Grid<double>& y, Grid<double>& g) {
    const auto pv = p.values();
    const auto yv = y.values();
    auto gv = g.values();
    for (std::size_t k = 0; k < pv.size(); ++k) {
      sum += bce_term(pv[k], yv[k]);
      gv[k] = bce_grad(pv[k], yv[k]) / n;
    }
  };
  channel(pred.free_space, gt.free_space, grad.free_space);
  channel(pred.occupied, gt.occupied, grad.occupied);
  return n > 0 ? sum / n : 0.0;
}

double total_loss(const RegionLosses& reg, double seg, double seg_weight) { return reg.l_reg + seg_weight * seg; }

GradCheckReport grad_check(const LossSpec& spec, int samples, double step, double tol, std::uint64_t seed) {
  if (!(step > 0.0) || !(tol > 0.0)) throw std::invalid_argument("grad_check: step and tol must be positive");
  Rng rng(seed);
  const double margin = 10.0 * step;
  const double knee = 1.0 / (spec.sigma * spec.sigma);
  const bool has_knee = spec.kind == LossKind::kHuber || spec.kind == LossKind::kEHL;

  GradCheckReport report;
  report.samples = samples;
  for (int n = 0; n < samples; ++n) {
    double h_true = 0.0;
    double h_pred = 0.0;
    double dh = 0.0;
    do {
      h_true = rng.uniform(0.0, 4.0);
      h_pred = rng.uniform(0.0, 4.0);
      dh = std::abs(h_true - h_pred);
    } while (dh < margin || (has_knee && std::abs(dh - knee) < margin));

    const double analytic = pointwise_loss(spec, h_true, h_pred).grad;
    const double fd = (pointwise_loss(spec, h_true, h_pred + step).value -
                       pointwise_loss(spec, h_true, h_pred - step).value) /
                      (2.0 * step);
    const double rel = std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
    if (rel > report.max_rel_error || n == 0) {
      report.max_rel_error = rel;
      report.worst_h_true = h_true;
      report.worst_h_pred = h_pred;
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace radar_height
