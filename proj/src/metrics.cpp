#include "radar_height/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace radar_height {

namespace {

// Neumaier summation; keeps e.g. twenty copies of 0.1 summing to exactly 2.
struct Sum {
  double hi = 0.0;
  double lo = 0.0;
  void add(double v) {
    const double t = hi + v;
    lo += std::abs(hi) >= std::abs(v) ? (hi - t) + v : (v - t) + hi;
    hi = t;
  }
  double value() const { return hi + lo; }
};

struct Mean {
  Sum sum;
  long long n = 0;
  void add(double v) {
    sum.add(v);
    ++n;
  }
  std::optional<double> value() const {
    if (n == 0) return std::nullopt;
    return sum.value() / static_cast<double>(n);
  }
};

}  // namespace

HeightErrorReport height_errors(const HeightMap& gt, const HeightMap& pred, const RegionPartition& part) {
  if (!gt.same_shape(pred) || !gt.same_shape(part)) throw std::invalid_argument("height_errors: dims differ");
  Mean rhe, bhe, nonzero, zero;
  const auto g = gt.values();
  const auto p = pred.values();
  const auto r = part.values();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double e = std::abs(g[k] - p[k]);
    bhe.add(e);
    if (r[k] != Region::kRadar) continue;
    rhe.add(e);
    (g[k] != 0.0 ? nonzero : zero).add(e);
  }
  HeightErrorReport out;
  out.rhe = rhe.value();
  out.bhe = bhe.value();
  out.rhe_nonzero = nonzero.value();
  out.rhe_zero = zero.value();
  out.radar_pixels = static_cast<int>(rhe.n);
  out.nonzero_pixels = static_cast<int>(nonzero.n);
  return out;
}

HeightErrorReport radar_point_errors(const Frame& frame, const GroundTruth& gt,
                                     const std::vector<PointHeight>& heights) {
  std::map<int, double> by_id;
  for (const auto& ph : heights) by_id[ph.point_id] = ph.height;
  Mean rhe, nonzero, zero;
  const RadarProjection proj = project_radar(frame);
  for (const auto& p : proj.winners()) {
    const auto it = by_id.find(p.id);
    const double h = it == by_id.end() ? 0.0 : it->second;
    const double truth = gt.heights(p.pixel.row, p.pixel.col);
    const double e = std::abs(truth - h);
    rhe.add(e);
    (truth != 0.0 ? nonzero : zero).add(e);
  }
  HeightErrorReport out;
  out.rhe = rhe.value();
  out.rhe_nonzero = nonzero.value();
  out.rhe_zero = zero.value();
  out.radar_pixels = static_cast<int>(rhe.n);
  out.nonzero_pixels = static_cast<int>(nonzero.n);
  return out;
}

DepthErrorReport depth_errors(const Grid<double>& pred, const Grid<double>& gt, const Grid<std::uint8_t>& valid) {
  if (!pred.same_shape(gt) || !pred.same_shape(valid)) throw std::invalid_argument("depth_errors: dims differ");
  Sum abs_sum, sq_sum, rel_sum;
  long long within[3] = {0, 0, 0};
  long long n = 0;
  const double thresholds[3] = {1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};
  const auto p = pred.values();
  const auto g = gt.values();
  const auto v = valid.values();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!v[k]) continue;
    if (!(g[k] > 0.0)) throw std::invalid_argument("depth_errors: ground truth must be > 0 inside the valid set");
    const double diff = std::abs(p[k] - g[k]);
    abs_sum.add(diff);
    sq_sum.add(diff * diff);
    rel_sum.add(diff / g[k]);
    const double ratio = std::max(p[k] / g[k], g[k] / p[k]);
    for (int t = 0; t < 3; ++t) {
      if (ratio < thresholds[t]) ++within[t];
    }
    ++n;
  }
  if (n == 0) throw std::invalid_argument("depth_errors: valid set is empty");
  DepthErrorReport out;
  const auto dn = static_cast<double>(n);
  out.mae = abs_sum.value() / dn;
  out.rmse = std::sqrt(sq_sum.value() / dn);
  out.absrel = rel_sum.value() / dn;
  for (int t = 0; t < 3; ++t) out.delta[static_cast<std::size_t>(t)] = static_cast<double>(within[t]) / dn;
  out.count = n;
  return out;
}

HeightSummary dataset_aggregate(const std::vector<HeightErrorReport>& frames) {
  Mean rhe, bhe, nonzero, zero;
  for (const auto& f : frames) {
    if (f.rhe) rhe.add(*f.rhe);
    if (f.bhe) bhe.add(*f.bhe);
    if (f.rhe_nonzero) nonzero.add(*f.rhe_nonzero);
    if (f.rhe_zero) zero.add(*f.rhe_zero);
  }
  HeightSummary s;
  s.frames = static_cast<int>(frames.size());
  s.rhe = rhe.value();
  s.bhe = bhe.value();
  s.rhe_nonzero = nonzero.value();
  s.rhe_zero = zero.value();
  s.rhe_frames = static_cast<int>(rhe.n);
  s.bhe_frames = static_cast<int>(bhe.n);
  s.rhe_nonzero_frames = static_cast<int>(nonzero.n);
  s.rhe_zero_frames = static_cast<int>(zero.n);
  return s;
}

}  // namespace radar_height
