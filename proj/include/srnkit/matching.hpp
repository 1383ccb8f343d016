#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "srnkit/box.hpp"

namespace srnkit {

// Per-anchor assignment under the two-threshold rule:
//   max-IoU >  theta_p            positive (gt_index = argmax, ties -> lowest index)
//   max-IoU in [0, theta_n)       negative
//   otherwise                     ignored (includes IoU == theta_p exactly)
// Matching is threshold-pure: there is no forced best-anchor-per-gt pass,
// so a ground truth may end up with no positive anchor.
struct MatchResult {
    static constexpr int kNegative = -1;
    static constexpr int kIgnored = -2;

    std::vector<int> gt_index;   // >= 0 positive, else one of the sentinels
    std::vector<double> max_iou;
    double theta_p = 0.0;
    double theta_n = 0.0;

    std::size_t size() const { return gt_index.size(); }
    bool is_positive(std::size_t i) const { return gt_index[i] >= 0; }
    bool is_negative(std::size_t i) const { return gt_index[i] == kNegative; }
    bool is_ignored(std::size_t i) const { return gt_index[i] == kIgnored; }
};

// Step one uses (theta_p, theta_n) = (0.7, 0.3); step two uses (0.5, 0.4).
struct MatchThresholds {
    double theta_p = 0.7;
    double theta_n = 0.3;

    static MatchThresholds step1() { return {0.7, 0.3}; }
    static MatchThresholds step2() { return {0.5, 0.4}; }
};

// Empty gts makes every anchor negative. Throws on theta_n > theta_p,
// thresholds outside [0,1], or a degenerate ground-truth box.
MatchResult match_anchors(std::span<const Box> anchors, std::span<const Box> gts,
                          MatchThresholds thresholds);

struct BalanceStats {
    std::size_t num_positive = 0;
    std::size_t num_negative = 0;
    std::size_t num_ignored = 0;
    double pos_to_neg_ratio = 0.0;  // +inf sentinel when there are no negatives
};

BalanceStats class_balance_stats(const MatchResult& match);

}  // namespace srnkit
