#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srnkit/box.hpp"
#include "srnkit/pipeline.hpp"
#include "srnkit/wider_io.hpp"

namespace srnkit {

// One ground-truth face as the evaluator sees it. target: counts toward
// recall and may consume a detection as a true positive. ignore: matched
// detections are discarded without penalty. Neither flag: the face does
// not take part in matching at all (zero-size entries).
struct EvalFace {
    Box box;
    bool target = false;
    bool ignore = false;
};

enum class DetClass { kTruePositive, kFalsePositive, kIgnored };

// Per-image matching outcome, index-parallel arrays sorted by descending
// detection score.
struct ImageMatches {
    std::vector<double> scores;
    std::vector<DetClass> classes;
    std::size_t target_count = 0;
};

// Greedy score-ordered matching: a detection is a true positive when its
// best-IoU unmatched target reaches iou_threshold (that target is then
// consumed); otherwise it is ignored when some ignore-face reaches the
// threshold; otherwise a false positive. Ties in score keep input order.
ImageMatches match_detections(const std::vector<Detection>& detections,
                              const std::vector<EvalFace>& faces, double iou_threshold = 0.5);

struct EvalCurve {
    std::vector<double> thresholds;  // 1000 points, descending
    std::vector<double> precision;
    std::vector<double> recall;
    double ap = 0.0;
};

inline constexpr int kCurvePoints = 1000;

// Precision/recall swept over kCurvePoints thresholds 1-(k+1)/N for
// k = 0..N-1; a detection counts at threshold t when score >= t. Precision
// with no predictions is 1. ap integrates the monotone precision envelope
// over recall. Throws when the total target count is zero.
EvalCurve pr_curve(const std::vector<double>& scores, const std::vector<DetClass>& classes,
                   std::size_t total_targets);
EvalCurve pr_curve(const std::vector<ImageMatches>& per_image);

// Difficulty bands standing in for the official subset lists: a face is in
// a subset when its height reaches the band minimum (hard has no minimum,
// so hard includes medium includes easy). Invalid-flagged faces are always
// ignore-class; zero-size faces never participate.
struct SubsetBands {
    double easy_min_height = 50.0;
    double medium_min_height = 30.0;
};

// Explicit subset membership: per subset name, per image path, the indices
// (0-based, into the ground-truth face list) that are in the subset.
using SubsetLists = std::map<std::string, std::map<std::string, std::vector<int>>>;

// Builds evaluator faces for one image and one subset. min_height applies
// when `listed` is null; otherwise membership comes from the list.
std::vector<EvalFace> faces_for_subset(const std::vector<GroundTruthFace>& faces,
                                       double min_height, const std::vector<int>* listed);

// Reads easy.txt / medium.txt / hard.txt from a directory. Each file holds
// blocks of image path, index count, then one 0-based face index per line.
SubsetLists load_subset_lists(const std::filesystem::path& dir);

// Full protocol: per-subset curves keyed "easy"/"medium"/"hard". Images
// missing from `detections` count as zero detections; detection keys not
// present in the ground truth raise an error naming every offender.
std::map<std::string, EvalCurve> evaluate(
    const std::vector<GtEntry>& ground_truth,
    const std::map<std::string, std::vector<Detection>>& detections,
    const SubsetBands& bands = {}, const SubsetLists* subset_lists = nullptr,
    double iou_threshold = 0.5);

}  // namespace srnkit
