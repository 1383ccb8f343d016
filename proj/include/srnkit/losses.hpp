#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "srnkit/box.hpp"
#include "srnkit/matching.hpp"

namespace srnkit {

// Center-offset / log-size box parameterization:
//   dx = (gcx - acx) / aw    dw = ln(gw / aw)
//   dy = (gcy - acy) / ah    dh = ln(gh / ah)
struct BoxDelta {
    double dx = 0.0;
    double dy = 0.0;
    double dw = 0.0;
    double dh = 0.0;
};

// Largest admissible log size ratio, ln(1000/16). Keeps decode finite for
// arbitrary predicted deltas.
inline constexpr double kMaxLogSizeRatio = 4.135166556742356;

BoxDelta encode(const Box& gt, const Box& anchor);          // throws on degenerate input
Box decode(const Box& anchor, const BoxDelta& delta);       // clamps dw/dh at +-kMaxLogSizeRatio

struct LossConfig {
    double focal_alpha = 0.25;
    double focal_gamma = 2.0;
    double smooth_l1_beta = 1.0;
    double probability_epsilon = 1e-7;  // scores are clamped into [eps, 1-eps]
};

// Binary focal loss for a face/background score p in (0,1):
//   positive: -alpha     * (1-p)^gamma * ln(p)
//   negative: -(1-alpha) *    p ^gamma * ln(1-p)
// Throws when p is not strictly inside (0,1); callers clamp first.
double focal_loss(double p, bool positive, const LossConfig& cfg);

// d focal / d p, closed form. Used for derivative spot-checks.
double focal_loss_grad(double p, bool positive, const LossConfig& cfg);

// Elementwise smooth-L1 summed over the four delta components.
double smooth_l1(const BoxDelta& predicted, const BoxDelta& target, double beta);

// One training step's predictions and assignments over the anchor set.
struct StepLossInput {
    std::vector<double> scores;       // predicted face probability per anchor
    std::vector<int> labels;          // MatchResult::gt_index convention
    std::vector<BoxDelta> deltas;     // predicted regression per anchor
    std::vector<BoxDelta> targets;    // encoded targets, meaningful for positives
};

// Sum of the two steps' classification and regression terms. In the first
// step, classification covers only low-level anchors and regression only
// high-level positives (the selective part); the second step covers every
// level. Ignored anchors contribute nothing. Each step's terms are divided
// by that step's positive-anchor count, floored at one.
double total_loss(const StepLossInput& step1, const StepLossInput& step2,
                  std::span<const int> anchor_levels, int low_level_count,
                  const LossConfig& cfg);

}  // namespace srnkit
