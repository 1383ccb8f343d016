#include "srnkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srnkit {

BoxDelta encode(const Box& gt, const Box& anchor) {
    if (anchor.degenerate())
        throw std::invalid_argument("encode: degenerate anchor");
    if (gt.width() <= 0.0 || gt.height() <= 0.0)
        throw std::invalid_argument("encode: degenerate ground-truth box");
    return BoxDelta{(gt.center_x() - anchor.center_x()) / anchor.width(),
                    (gt.center_y() - anchor.center_y()) / anchor.height(),
                    std::log(gt.width() / anchor.width()),
                    std::log(gt.height() / anchor.height())};
}

Box decode(const Box& anchor, const BoxDelta& delta) {
    if (anchor.degenerate())
        throw std::invalid_argument("decode: degenerate anchor");
    const double dw = std::clamp(delta.dw, -kMaxLogSizeRatio, kMaxLogSizeRatio);
    const double dh = std::clamp(delta.dh, -kMaxLogSizeRatio, kMaxLogSizeRatio);
    const double cx = anchor.center_x() + delta.dx * anchor.width();
    const double cy = anchor.center_y() + delta.dy * anchor.height();
    const double w = anchor.width() * std::exp(dw);
    const double h = anchor.height() * std::exp(dh);
    return Box::from_center(cx, cy, w, h);
}

double focal_loss(double p, bool positive, const LossConfig& cfg) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("focal_loss: p must lie strictly inside (0,1)");
    if (positive) return -cfg.focal_alpha * std::pow(1.0 - p, cfg.focal_gamma) * std::log(p);
    return -(1.0 - cfg.focal_alpha) * std::pow(p, cfg.focal_gamma) * std::log(1.0 - p);
}

double focal_loss_grad(double p, bool positive, const LossConfig& cfg) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("focal_loss_grad: p must lie strictly inside (0,1)");
    const double a = cfg.focal_alpha;
    const double g = cfg.focal_gamma;
    if (positive) {
        // d/dp [-a (1-p)^g ln p] = a g (1-p)^(g-1) ln p - a (1-p)^g / p
        const double pow_g1 = g == 0.0 ? 0.0 : std::pow(1.0 - p, g - 1.0);
        return a * g * pow_g1 * std::log(p) - a * std::pow(1.0 - p, g) / p;
    }
    // d/dp [-(1-a) p^g ln(1-p)] = -(1-a) g p^(g-1) ln(1-p) + (1-a) p^g / (1-p)
    const double pow_g1 = g == 0.0 ? 0.0 : std::pow(p, g - 1.0);
    return -(1.0 - a) * g * pow_g1 * std::log(1.0 - p) + (1.0 - a) * std::pow(p, g) / (1.0 - p);
}

static double smooth_l1_scalar(double x, double beta) {
    const double ax = std::abs(x);
    if (ax < beta) return 0.5 * x * x / beta;
    return ax - 0.5 * beta;
}

double smooth_l1(const BoxDelta& predicted, const BoxDelta& target, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("smooth_l1: beta must be positive");
    return smooth_l1_scalar(predicted.dx - target.dx, beta) +
           smooth_l1_scalar(predicted.dy - target.dy, beta) +
           smooth_l1_scalar(predicted.dw - target.dw, beta) +
           smooth_l1_scalar(predicted.dh - target.dh, beta);
}

namespace {

void check_sizes(const StepLossInput& step, std::size_t n, const char* which) {
    if (step.scores.size() != n || step.labels.size() != n || step.deltas.size() != n ||
        step.targets.size() != n)
        throw std::invalid_argument(std::string("total_loss: misaligned arrays in ") + which);
}

std::size_t positive_count(const StepLossInput& step) {
    std::size_t n = 0;
    for (int label : step.labels)
        if (label >= 0) ++n;
    return n;
}

// cls_low_only: restrict classification to low levels (first step).
// reg_high_only: restrict regression to high levels (first step).
double step_loss(const StepLossInput& step, std::span<const int> levels, int low_level_count,
                 bool cls_low_only, bool reg_high_only, const LossConfig& cfg) {
    const double n_pos = static_cast<double>(std::max<std::size_t>(positive_count(step), 1));
    double cls = 0.0;
    double reg = 0.0;
    for (std::size_t i = 0; i < step.scores.size(); ++i) {
        const bool low = levels[i] < low_level_count;
        const int label = step.labels[i];
        if (label == MatchResult::kIgnored) continue;
        const bool positive = label >= 0;
        if (!cls_low_only || low) {
            const double p = std::clamp(step.scores[i], cfg.probability_epsilon,
                                        1.0 - cfg.probability_epsilon);
            cls += focal_loss(p, positive, cfg);
        }
        if (positive && (!reg_high_only || !low)) {
            reg += smooth_l1(step.deltas[i], step.targets[i], cfg.smooth_l1_beta);
        }
    }
    return cls / n_pos + reg / n_pos;
}

}  // namespace

double total_loss(const StepLossInput& step1, const StepLossInput& step2,
                  std::span<const int> anchor_levels, int low_level_count,
                  const LossConfig& cfg) {
    const std::size_t n = anchor_levels.size();
    check_sizes(step1, n, "step1");
    check_sizes(step2, n, "step2");
    return step_loss(step1, anchor_levels, low_level_count, true, true, cfg) +
           step_loss(step2, anchor_levels, low_level_count, false, false, cfg);
}

}  // namespace srnkit
