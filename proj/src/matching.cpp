#include "srnkit/matching.hpp"

#include <limits>
#include <stdexcept>

namespace srnkit {

MatchResult match_anchors(std::span<const Box> anchors, std::span<const Box> gts,
                          MatchThresholds thresholds) {
    if (thresholds.theta_n > thresholds.theta_p)
        throw std::invalid_argument("match_anchors: theta_n must not exceed theta_p");
    if (thresholds.theta_n < 0.0 || thresholds.theta_p > 1.0)
        throw std::invalid_argument("match_anchors: thresholds must lie in [0,1]");
    for (const Box& gt : gts)
        if (gt.degenerate())
            throw std::invalid_argument("match_anchors: degenerate ground-truth box");

    MatchResult result;
    result.theta_p = thresholds.theta_p;
    result.theta_n = thresholds.theta_n;
    result.gt_index.resize(anchors.size(), MatchResult::kNegative);
    result.max_iou.resize(anchors.size(), 0.0);

    for (std::size_t a = 0; a < anchors.size(); ++a) {
        double best = 0.0;
        int best_gt = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double v = iou(anchors[a], gts[g]);
            if (v > best) {  // strict: ties keep the lowest gt index
                best = v;
                best_gt = static_cast<int>(g);
            }
        }
        result.max_iou[a] = best;
        if (best > thresholds.theta_p) {
            result.gt_index[a] = best_gt;
        } else if (best < thresholds.theta_n) {
            result.gt_index[a] = MatchResult::kNegative;
        } else {
            result.gt_index[a] = MatchResult::kIgnored;
        }
    }
    return result;
}

BalanceStats class_balance_stats(const MatchResult& match) {
    BalanceStats stats;
    for (std::size_t i = 0; i < match.size(); ++i) {
        if (match.is_positive(i))
            ++stats.num_positive;
        else if (match.is_negative(i))
            ++stats.num_negative;
        else
            ++stats.num_ignored;
    }
    stats.pos_to_neg_ratio =
        stats.num_negative == 0
            ? std::numeric_limits<double>::infinity()
            : static_cast<double>(stats.num_positive) / static_cast<double>(stats.num_negative);
    return stats;
}

}  // namespace srnkit
