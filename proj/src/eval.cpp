#include "srnkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace srnkit {
namespace {

// IoU that tolerates zero-area participants (a zero-area pair never
// matches anything).
double overlap(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

}  // namespace

ImageMatches match_detections(const std::vector<Detection>& detections,
                              const std::vector<EvalFace>& faces, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw std::invalid_argument("match_detections: iou_threshold must lie in (0, 1]");

    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].score > detections[b].score;
    });

    ImageMatches out;
    out.scores.reserve(detections.size());
    out.classes.reserve(detections.size());
    for (const EvalFace& f : faces)
        if (f.target) ++out.target_count;

    std::vector<char> consumed(faces.size(), 0);
    for (std::size_t oi : order) {
        const Detection& det = detections[oi];
        double best_target_iou = 0.0;
        std::size_t best_target = faces.size();
        double best_ignore_iou = 0.0;
        for (std::size_t gi = 0; gi < faces.size(); ++gi) {
            const EvalFace& f = faces[gi];
            if (!f.target && !f.ignore) continue;
            const double v = overlap(det.box, f.box);
            if (f.target && !consumed[gi]) {
                if (v > best_target_iou) {
                    best_target_iou = v;
                    best_target = gi;
                }
            } else if (f.ignore && v > best_ignore_iou) {
                best_ignore_iou = v;
            }
        }
        DetClass cls;
        if (best_target < faces.size() && best_target_iou >= iou_threshold) {
            cls = DetClass::kTruePositive;
            consumed[best_target] = 1;
        } else if (best_ignore_iou >= iou_threshold) {
            cls = DetClass::kIgnored;
        } else {
            cls = DetClass::kFalsePositive;
        }
        out.scores.push_back(det.score);
        out.classes.push_back(cls);
    }
    return out;
}

EvalCurve pr_curve(const std::vector<double>& scores, const std::vector<DetClass>& classes,
                   std::size_t total_targets) {
    if (scores.size() != classes.size())
        throw std::invalid_argument("pr_curve: scores and classes must be parallel");
    if (total_targets == 0) throw std::invalid_argument("pr_curve: total target count is zero");

    EvalCurve curve;
    curve.thresholds.resize(kCurvePoints);
    curve.precision.resize(kCurvePoints);
    curve.recall.resize(kCurvePoints);
    for (int k = 0; k < kCurvePoints; ++k) {
        const double t = 1.0 - static_cast<double>(k + 1) / kCurvePoints;
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] < t) continue;
            if (classes[i] == DetClass::kTruePositive) ++tp;
            else if (classes[i] == DetClass::kFalsePositive) ++fp;
        }
        curve.thresholds[k] = t;
        curve.precision[k] = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
        curve.recall[k] = static_cast<double>(tp) / static_cast<double>(total_targets);
    }

    // Monotone precision envelope from the high-recall end, then the area
    // under precision as a step function of recall.
    std::vector<double> envelope = curve.precision;
    for (int k = kCurvePoints - 2; k >= 0; --k)
        envelope[k] = std::max(envelope[k], envelope[k + 1]);
    double ap = curve.recall[0] * envelope[0];
    for (int k = 1; k < kCurvePoints; ++k)
        ap += (curve.recall[k] - curve.recall[k - 1]) * envelope[k];
    curve.ap = ap;
    return curve;
}

EvalCurve pr_curve(const std::vector<ImageMatches>& per_image) {
    std::vector<double> scores;
    std::vector<DetClass> classes;
    std::size_t total = 0;
    for (const ImageMatches& m : per_image) {
        scores.insert(scores.end(), m.scores.begin(), m.scores.end());
        classes.insert(classes.end(), m.classes.begin(), m.classes.end());
        total += m.target_count;
    }
    return pr_curve(scores, classes, total);
}

std::vector<EvalFace> faces_for_subset(const std::vector<GroundTruthFace>& faces,
                                       double min_height, const std::vector<int>* listed) {
    std::vector<char> in_list;
    if (listed != nullptr) {
        in_list.assign(faces.size(), 0);
        for (int idx : *listed) {
            if (idx < 0 || idx >= static_cast<int>(faces.size()))
                throw std::invalid_argument("faces_for_subset: subset list index " +
                                            std::to_string(idx) + " out of range");
            in_list[static_cast<std::size_t>(idx)] = 1;
        }
    }

    std::vector<EvalFace> out;
    out.reserve(faces.size());
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const GroundTruthFace& f = faces[i];
        EvalFace ef;
        ef.box = f.box();
        if (!f.zero_size()) {
            const bool member = listed != nullptr ? in_list[i] != 0 : f.h >= min_height;
            ef.target = member && f.invalid == 0;
            ef.ignore = !ef.target;
        }
        out.push_back(ef);
    }
    return out;
}

SubsetLists load_subset_lists(const std::filesystem::path& dir) {
    SubsetLists lists;
    for (const char* name : {"easy", "medium", "hard"}) {
        const std::filesystem::path file = dir / (std::string(name) + ".txt");
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot open subset list: " + file.string());
        const std::string source = file.string();
        auto& per_image = lists[name];
        std::string line;
        std::size_t line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const std::string path = line;
            if (!std::getline(in, line))
                throw parse_error(source, line_number, "missing index count after image path");
            ++line_number;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const long count = parse_long(line, source, line_number);
            if (count < 0) throw parse_error(source, line_number, "negative index count");
            std::vector<int> indices;
            indices.reserve(static_cast<std::size_t>(count));
            for (long i = 0; i < count; ++i) {
                if (!std::getline(in, line))
                    throw parse_error(source, line_number, "truncated subset block");
                ++line_number;
                if (!line.empty() && line.back() == '\r') line.pop_back();
                indices.push_back(static_cast<int>(parse_long(line, source, line_number)));
            }
            if (!per_image.emplace(path, std::move(indices)).second)
                throw parse_error(source, line_number, "duplicate image '" + path + "'");
        }
    }
    return lists;
}

std::map<std::string, EvalCurve> evaluate(
    const std::vector<GtEntry>& ground_truth,
    const std::map<std::string, std::vector<Detection>>& detections, const SubsetBands& bands,
    const SubsetLists* subset_lists, double iou_threshold) {
    std::map<std::string, const std::vector<GroundTruthFace>*> gt_index;
    for (const GtEntry& e : ground_truth) gt_index[e.path] = &e.faces;

    std::vector<std::string> unknown;
    for (const auto& [key, dets] : detections)
        if (gt_index.find(key) == gt_index.end()) unknown.push_back(key);
    if (!unknown.empty()) {
        std::string msg = "evaluate: detection keys missing from ground truth:";
        for (const std::string& k : unknown) msg += " '" + k + "'";
        throw std::invalid_argument(msg);
    }

    const std::vector<Detection> no_dets;
    const std::pair<std::string, double> subsets[] = {
        {"easy", bands.easy_min_height},
        {"medium", bands.medium_min_height},
        {"hard", 0.0},
    };

    std::map<std::string, EvalCurve> result;
    for (const auto& [name, min_height] : subsets) {
        const std::map<std::string, std::vector<int>>* lists = nullptr;
        if (subset_lists != nullptr) {
            auto it = subset_lists->find(name);
            if (it == subset_lists->end())
                throw std::invalid_argument("evaluate: subset lists lack subset '" + name + "'");
            lists = &it->second;
        }

        std::vector<ImageMatches> matches;
        matches.reserve(ground_truth.size());
        for (const GtEntry& entry : ground_truth) {
            const std::vector<int>* listed = nullptr;
            if (lists != nullptr) {
                auto it = lists->find(entry.path);
                if (it != lists->end()) listed = &it->second;
            }
            static const std::vector<int> empty_list;
            const std::vector<EvalFace> faces = faces_for_subset(
                entry.faces, min_height, lists != nullptr ? (listed ? listed : &empty_list) : nullptr);
            auto dit = detections.find(entry.path);
            matches.push_back(match_detections(dit == detections.end() ? no_dets : dit->second,
                                               faces, iou_threshold));
        }
        result[name] = pr_curve(matches);
    }
    return result;
}

}  // namespace srnkit
