#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "radar_height/ground_truth.hpp"

namespace radar_height {

enum class LossKind { kL1, kL2, kWL1, kWL2, kHuber, kEHL };

std::string_view to_string(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view name);

/// Pointwise loss choice, breakpoint parameter and BG/FG/RAD region weights.
/// Defaults are the tuned EHL setting.
struct LossSpec {
  LossKind kind = LossKind::kEHL;
  double sigma = 3.0;
  double alpha = 0.5;  // background
  double beta = 1.0;   // foreground
  double gamma = 2.0;  // radar

  bool operator==(const LossSpec&) const = default;
};

/// Throws ConfigError when sigma <= 0 or a weight is negative or non-finite.
void validate(const LossSpec& spec);

struct LossValue {
  double value = 0.0;
  double grad = 0.0;  // d value / d h_pred
};

/// Loss of one pixel as a function of dh = |h_true - h_pred| (natural log weighting):
///   L1  dh                 L2  dh^2
///   WL1 dh ln(dh+1)        WL2 dh^2 ln(dh+1)
///   HL  s^2 dh^2 / 2 below dh = 1/s^2, dh - 1/(2 s^2) above
///   EHL the HL branches multiplied by ln(dh+1)
/// The derivative is taken with respect to h_pred and is 0 at dh = 0.
LossValue pointwise_loss(const LossSpec& spec, double h_true, double h_pred);

/// Loss and d/d(dh) as a function of the absolute error alone.
LossValue loss_of_error(const LossSpec& spec, double dh);

struct RegionLosses {
  double l_bg = 0.0;
  double l_fg = 0.0;
  double l_rad = 0.0;
  double l_reg = 0.0;
};

/// Mean pointwise loss per region (0 for an empty region) and the weighted composite.
RegionLosses region_loss(const LossSpec& spec, const HeightMap& gt, const HeightMap& pred,
                         const RegionPartition& part);

/// region_loss plus d l_reg / d pred for every pixel.
RegionLosses region_loss_with_grad(const LossSpec& spec, const HeightMap& gt, const HeightMap& pred,
                                   const RegionPartition& part, HeightMap& grad);

inline constexpr double kBceClamp = 1e-7;

/// Mean binary cross-entropy over both channels, predictions clamped to [1e-7, 1 - 1e-7].
double seg_bce(const SegMask& pred, const SegMask& gt);

/// seg_bce plus its gradient with respect to each predicted probability.
double seg_bce_with_grad(const SegMask& pred, const SegMask& gt, SegMask& grad);

/// Regression plus segmentation objective; `seg_weight` is 1 for the equal weighting.
double total_loss(const RegionLosses& reg, double seg, double seg_weight = 1.0);

struct GradCheckReport {
  int samples = 0;
  double max_rel_error = 0.0;
  double worst_h_true = 0.0;
  double worst_h_pred = 0.0;
  bool passed = false;
};

/// Compares pointwise_loss's analytic derivative with central differences at
/// random (h_true, h_pred) pairs in [0, 4]^2 that keep 10*step away from dh = 0
/// and from the breakpoint. Relative error is |a - fd| / max(1, |a|, |fd|).
GradCheckReport grad_check(const LossSpec& spec, int samples, double step, double tol,
                           std::uint64_t seed = 7);

}  // namespace radar_height
