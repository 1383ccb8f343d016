#include "srnkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "srnkit/losses.hpp"
#include "srnkit/rng.hpp"

namespace srnkit {
namespace {

long grid_cells(int extent, int stride) { return (extent + stride - 1) / stride; }

// Nearest grid index to image coordinate c for centers at stride*(i+0.5).
long nearest_cell(double c, int stride, long cells) {
    const long i = std::lround(c / stride - 0.5);
    return std::clamp(i, 0L, cells - 1);
}

}  // namespace

void SceneSpec::validate() const {
    if (image_width < 1 || image_height < 1)
        throw std::invalid_argument("SceneSpec: image dimensions must be >= 1");
    if (face_count < 0) throw std::invalid_argument("SceneSpec: face_count must be >= 0");
    if (!(min_scale > 0.0 && max_scale >= min_scale))
        throw std::invalid_argument("SceneSpec: need 0 < min_scale <= max_scale");
    if (!(aspect_ratio > 0.0)) throw std::invalid_argument("SceneSpec: aspect_ratio must be positive");
    if (!(max_pair_iou > 0.0 && max_pair_iou <= 1.0))
        throw std::invalid_argument("SceneSpec: max_pair_iou must lie in (0, 1]");
    if (!(match_iou > 0.0 && match_iou < 1.0))
        throw std::invalid_argument("SceneSpec: match_iou must lie in (0, 1)");
    if (!(positive_alpha > 0.0 && positive_beta > 0.0 && negative_alpha > 0.0 &&
          negative_beta > 0.0))
        throw std::invalid_argument("SceneSpec: Beta parameters must be positive");
    if (!(delta_sigma >= 0.0)) throw std::invalid_argument("SceneSpec: delta_sigma must be >= 0");
    if (max_attempts < 1) throw std::invalid_argument("SceneSpec: max_attempts must be >= 1");
}

double best_anchor_iou(const PyramidConfig& config, const Box& face) {
    config.validate();
    if (!face.valid() || face.degenerate())
        throw std::invalid_argument("best_anchor_iou: face box is degenerate");

    const double root_ratio = std::sqrt(config.aspect_ratio);
    const double cx = face.center_x();
    const double cy = face.center_y();
    double best = 0.0;
    for (std::size_t level = 0; level < config.num_levels(); ++level) {
        const int stride = config.strides[level];
        const long cols = grid_cells(config.input_width, stride);
        const long rows = grid_cells(config.input_height, stride);
        const long i = nearest_cell(cx, stride, cols);
        const long j = nearest_cell(cy, stride, rows);
        const double acx = stride * (i + 0.5);
        const double acy = stride * (j + 0.5);
        for (double m : config.scale_multipliers) {
            const double scale = m * stride;
            const Box anchor = Box::from_center(acx, acy, scale / root_ratio, scale * root_ratio);
            best = std::max(best, iou(face, anchor));
        }
    }
    return best;
}

StepScores synth_scores(const std::vector<Box>& faces, const AnchorSet& anchors,
                        const SceneSpec& spec, Rng& rng, std::vector<int>* anchor_face_out) {
    spec.validate();
    anchors.config.validate();
    for (const Box& f : faces)
        if (!f.valid() || f.degenerate())
            throw std::invalid_argument("synth_scores: face boxes must be non-degenerate");

    // Per-anchor best face by IoU, scanned over the grid window each face
    // can overlap instead of the full anchor list.
    const std::size_t n = anchors.size();
    std::vector<double> max_iou(n, 0.0);
    std::vector<int> anchor_face(n, -1);
    const PyramidConfig& cfg = anchors.config;
    const std::size_t num_mults = cfg.scale_multipliers.size();
    const double anchor_root_ratio = std::sqrt(cfg.aspect_ratio);
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
        const Box& face = faces[static_cast<std::size_t>(f)];
        for (std::size_t level = 0; level < cfg.num_levels(); ++level) {
            const int stride = cfg.strides[level];
            const long cols = grid_cells(cfg.input_width, stride);
            const long rows = grid_cells(cfg.input_height, stride);
            for (std::size_t mi = 0; mi < num_mults; ++mi) {
                const double scale = cfg.scale_multipliers[mi] * stride;
                const double half_w = scale / anchor_root_ratio / 2.0;
                const double half_h = scale * anchor_root_ratio / 2.0;
                const long i_lo = std::clamp(
                    static_cast<long>(std::floor((face.x1 - half_w) / stride - 0.5)), 0L, cols - 1);
                const long i_hi = std::clamp(
                    static_cast<long>(std::ceil((face.x2 + half_w) / stride - 0.5)), 0L, cols - 1);
                const long j_lo = std::clamp(
                    static_cast<long>(std::floor((face.y1 - half_h) / stride - 0.5)), 0L, rows - 1);
                const long j_hi = std::clamp(
                    static_cast<long>(std::ceil((face.y2 + half_h) / stride - 0.5)), 0L, rows - 1);
                for (long j = j_lo; j <= j_hi; ++j) {
                    for (long i = i_lo; i <= i_hi; ++i) {
                        const std::size_t idx = anchors.level_offsets[level] +
                                                (static_cast<std::size_t>(j * cols + i)) * num_mults +
                                                mi;
                        const double v = iou(face, anchors.boxes[idx]);
                        if (v > max_iou[idx]) {
                            max_iou[idx] = v;
                            anchor_face[idx] = f;
                        }
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!(max_iou[i] > spec.match_iou)) anchor_face[i] = -1;

    StepScores scores;
    scores.first.scores.resize(n);
    scores.first.deltas.resize(n);
    scores.second.scores.resize(n);
    scores.second.deltas.resize(n);
    auto draw_score = [&](bool matched) {
        if (spec.oracle_scores) return matched ? 1.0 : 0.0;
        return matched ? rng.beta(spec.positive_alpha, spec.positive_beta)
                       : rng.beta(spec.negative_alpha, spec.negative_beta);
    };
    auto perturb = [&](BoxDelta d) {
        if (spec.delta_sigma > 0.0) {
            d.dx += spec.delta_sigma * rng.normal();
            d.dy += spec.delta_sigma * rng.normal();
            d.dw += spec.delta_sigma * rng.normal();
            d.dh += spec.delta_sigma * rng.normal();
        }
        return d;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const bool matched = anchor_face[i] >= 0;
        scores.first.scores[i] = draw_score(matched);
        scores.second.scores[i] = draw_score(matched);

        const Box& anchor = anchors.boxes[i];
        const Box* face = matched ? &faces[static_cast<std::size_t>(anchor_face[i])] : nullptr;
        BoxDelta d1 = matched ? encode(*face, anchor) : BoxDelta{};
        d1 = perturb(d1);
        scores.first.deltas[i] = d1;

        // The second step sees what inference will see: the anchor after
        // STR on high levels, the raw anchor on low ones.
        const Box refined = anchors.is_low_level(i) ? anchor : decode(anchor, d1);
        BoxDelta d2 = matched ? encode(*face, refined) : BoxDelta{};
        scores.second.deltas[i] = perturb(d2);
    }
    if (anchor_face_out != nullptr) *anchor_face_out = std::move(anchor_face);
    return scores;
}

SynthScene synth_scene(const SceneSpec& spec, const AnchorSet& anchors) {
    spec.validate();
    anchors.config.validate();

    const double root_ratio = std::sqrt(spec.aspect_ratio);
    // A face of scale s spans s/root_ratio by s*root_ratio, so the frame
    // bounds the drawable scale range.
    const double fit_max =
        std::min({spec.max_scale, spec.image_width * root_ratio, spec.image_height / root_ratio});
    if (spec.face_count > 0 && fit_max < spec.min_scale)
        throw std::invalid_argument("synth_scene: no face of min_scale fits the frame");

    SynthScene scene;
    Rng place(Rng::derive(spec.seed, 0));
    const double log_lo = std::log(spec.min_scale);
    const double log_hi = std::log(fit_max);
    for (int k = 0; k < spec.face_count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
            const double s = std::exp(place.uniform(log_lo, log_hi));
            const double w = s / root_ratio;
            const double h = s * root_ratio;
            const double cx = place.uniform(w / 2.0, spec.image_width - w / 2.0);
            const double cy = place.uniform(h / 2.0, spec.image_height - h / 2.0);
            const Box cand = Box::from_center(cx, cy, w, h);

            bool ok = true;
            for (const Box& other : scene.faces) {
                if (iou(cand, other) >= spec.max_pair_iou) {
                    ok = false;
                    break;
                }
            }
            // Keep only placements some anchor can actually hit, so every
            // face is representable by the pyramid.
            if (ok && !(best_anchor_iou(anchors.config, cand) > spec.match_iou)) ok = false;
            if (ok) {
                scene.faces.push_back(cand);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw std::runtime_error("synth_scene: could not place face " + std::to_string(k + 1) +
                                     " of " + std::to_string(spec.face_count) + " after " +
                                     std::to_string(spec.max_attempts) + " attempts");
    }

    // Scores live on their own stream so the face layout is stable under
    // score-model changes.
    Rng noise(Rng::derive(spec.seed, 1));
    scene.scores = synth_scores(scene.faces, anchors, spec, noise, &scene.anchor_face);
    return scene;
}

}  // namespace srnkit
