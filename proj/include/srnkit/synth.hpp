#pragma once

#include <cstdint>
#include <vector>

#include "srnkit/anchors.hpp"
#include "srnkit/box.hpp"
#include "srnkit/pipeline.hpp"
#include "srnkit/rng.hpp"

namespace srnkit {

// Desk-scale stand-in for a trained network: face layouts plus coherent
// two-step scores, all driven by one seed.
struct SceneSpec {
    int image_width = 1024;
    int image_height = 1024;
    int face_count = 10;
    double min_scale = 8.0;     // face scale = sqrt(w*h), log-uniform
    double max_scale = 362.0;
    double aspect_ratio = 1.25; // face height / width
    double max_pair_iou = 0.3;  // placed faces stay below this pairwise
    double match_iou = 0.5;     // anchors above this against a face count as matched
    double positive_alpha = 8.0;  // matched scores ~ Beta(positive_alpha, positive_beta)
    double positive_beta = 2.0;
    double negative_alpha = 2.0;  // unmatched scores ~ Beta(negative_alpha, negative_beta)
    double negative_beta = 8.0;
    double delta_sigma = 0.0;     // Gaussian noise added to every delta component
    bool oracle_scores = false;   // matched -> 1.0, unmatched -> 0.0 instead of Beta draws
    int max_attempts = 1000;      // placement retries per face before giving up
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthScene {
    std::vector<Box> faces;
    StepScores scores;
    std::vector<int> anchor_face;  // per-anchor matched face index, -1 when unmatched
};

// Places face_count non-overlapping faces fully inside the frame, each
// positioned so that some anchor exceeds match_iou against it, then draws
// per-anchor scores and deltas. Matched anchors carry the encoding of
// their face (first step against the anchor, second step against the
// STR-refined anchor) plus noise; unmatched anchors carry pure noise.
// Throws std::runtime_error when a face cannot be placed within
// max_attempts draws.
SynthScene synth_scene(const SceneSpec& spec, const AnchorSet& anchors);

// The scoring half of synth_scene for an externally supplied face layout;
// score-model fields of `spec` apply, randomness comes from `rng`. When
// given, anchor_face receives the per-anchor matched face index (-1 for
// unmatched).
StepScores synth_scores(const std::vector<Box>& faces, const AnchorSet& anchors,
                        const SceneSpec& spec, Rng& rng, std::vector<int>* anchor_face = nullptr);

// Largest IoU any anchor of this pyramid can reach against the box,
// evaluated analytically via the nearest grid center per level and
// multiplier. Used by the placement rejection loop and handy in tests.
double best_anchor_iou(const PyramidConfig& config, const Box& face);

}  // namespace srnkit
