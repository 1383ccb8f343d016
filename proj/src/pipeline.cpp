#include "srnkit/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace srnkit {

void check_alignment(const AnchorSet& anchors, const StepScores& scores) {
    const std::size_t n = anchors.size();
    if (scores.first.scores.size() != n || scores.first.deltas.size() != n ||
        scores.second.scores.size() != n || scores.second.deltas.size() != n)
        throw std::invalid_argument("step scores are not aligned with the anchor set");
}

std::vector<std::size_t> stc_filter(const AnchorSet& anchors, const StepScores& scores,
                                    double threshold) {
    check_alignment(anchors, scores);
    std::vector<std::size_t> retained;
    retained.reserve(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (!anchors.is_low_level(i) || scores.first.scores[i] >= threshold)
            retained.push_back(i);
    }
    return retained;
}

std::vector<Box> str_refine(const AnchorSet& anchors, const StepScores& scores) {
    check_alignment(anchors, scores);
    std::vector<Box> refined(anchors.boxes);
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (!anchors.is_low_level(i))
            refined[i] = decode(anchors.boxes[i], scores.first.deltas[i]);
    }
    return refined;
}

// Overlap for suppression decisions; degenerate boxes count as disjoint so
// NMS stays total on arbitrary detection files.
static double suppression_overlap(const Box& a, const Box& b) {
    const double uni = a.area() + b.area() - intersection_area(a, b);
    if (uni <= 0.0) return 0.0;
    return intersection_area(a, b) / uni;
}

std::vector<Detection> nms(const std::vector<Detection>& detections, double iou_threshold) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].score > detections[b].score;
    });

    std::vector<Detection> kept;
    std::vector<char> suppressed(detections.size(), 0);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(detections[i]);
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (suppressed[j]) continue;
            if (suppression_overlap(detections[i].box, detections[j].box) > iou_threshold)
                suppressed[j] = 1;
        }
    }
    return kept;
}

std::vector<Detection> run_inference(const AnchorSet& anchors, const StepScores& scores,
                                     const InferenceParams& params, double image_width,
                                     double image_height) {
    check_alignment(anchors, scores);

    const std::vector<std::size_t> retained = stc_filter(anchors, scores, params.stc_threshold);
    const std::vector<Box> refined = str_refine(anchors, scores);

    // Rank survivors by second-step score, keep the top_k best.
    std::vector<std::size_t> order(retained);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores.second.scores[a] > scores.second.scores[b];
    });
    if (order.size() > params.top_k) order.resize(params.top_k);

    std::vector<Detection> candidates;
    candidates.reserve(order.size());
    for (std::size_t i : order) {
        const Box box =
            clip_box(decode(refined[i], scores.second.deltas[i]), image_width, image_height);
        if (box.degenerate()) continue;  // anchor decoded fully outside the frame
        candidates.push_back(Detection{box, scores.second.scores[i]});
    }

    std::vector<Detection> result = nms(candidates, params.nms_iou);
    if (result.size() > params.cap) result.resize(params.cap);
    return result;
}

std::vector<Detection> merge_multiscale(const std::vector<ScaledDetections>& sets,
                                        double nms_iou, std::size_t cap) {
    std::vector<Detection> pooled;
    for (const ScaledDetections& set : sets) {
        if (set.scale_factor <= 0.0)
            throw std::invalid_argument("merge_multiscale: scale factor must be positive");
        const double inv = 1.0 / set.scale_factor;
        for (const Detection& d : set.detections) {
            pooled.push_back(Detection{
                Box{d.box.x1 * inv, d.box.y1 * inv, d.box.x2 * inv, d.box.y2 * inv}, d.score});
        }
    }
    std::vector<Detection> result = nms(pooled, nms_iou);
    if (result.size() > cap) result.resize(cap);
    return result;
}

}  // namespace srnkit
