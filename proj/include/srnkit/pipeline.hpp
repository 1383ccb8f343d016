#pragma once

#include <cstddef>
#include <vector>

#include "srnkit/anchors.hpp"
#include "srnkit/box.hpp"
#include "srnkit/losses.hpp"

namespace srnkit {

// One step's predictions, index-parallel with an AnchorSet.
struct StepPrediction {
    std::vector<double> scores;   // in [0,1]
    std::vector<BoxDelta> deltas;
};

struct StepScores {
    StepPrediction first;
    StepPrediction second;

    std::size_t size() const { return first.scores.size(); }
};

struct Detection {
    Box box;
    double score = 0.0;
};

struct InferenceParams {
    double stc_threshold = 0.01;
    std::size_t top_k = 2000;
    double nms_iou = 0.4;
    std::size_t cap = 750;
};

// Throws if score arrays are not index-parallel with the anchor set.
void check_alignment(const AnchorSet& anchors, const StepScores& scores);

// First-step filtering: a low-level anchor survives iff its first-step
// score is >= threshold; high-level anchors always survive. Returns the
// surviving anchor indices in ascending order.
std::vector<std::size_t> stc_filter(const AnchorSet& anchors, const StepScores& scores,
                                    double threshold = 0.01);

// First-step regression: high-level anchors are replaced by the decode of
// their first-step delta; low-level anchors come back untouched.
std::vector<Box> str_refine(const AnchorSet& anchors, const StepScores& scores);

// Greedy NMS: repeatedly keep the highest-scoring remaining detection and
// suppress everything overlapping it with IoU strictly above the threshold.
// Equal scores are resolved by input order. Output is sorted by descending
// score. Zero-area boxes neither suppress nor get suppressed.
std::vector<Detection> nms(const std::vector<Detection>& detections, double iou_threshold);

// Full post-processing chain: STC filter -> STR refine -> top-k by
// second-step score -> decode second-step deltas against the refined
// anchors -> clip to the image -> NMS -> cap. Boxes clipped to zero area
// are dropped before NMS.
std::vector<Detection> run_inference(const AnchorSet& anchors, const StepScores& scores,
                                     const InferenceParams& params, double image_width,
                                     double image_height);

// Rescales each per-scale detection set back into original-image
// coordinates (divide by its scale factor), concatenates, then NMS + cap.
struct ScaledDetections {
    double scale_factor = 1.0;
    std::vector<Detection> detections;
};

std::vector<Detection> merge_multiscale(const std::vector<ScaledDetections>& sets,
                                        double nms_iou = 0.4, std::size_t cap = 750);

}  // namespace srnkit
