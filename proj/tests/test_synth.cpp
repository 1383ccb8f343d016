#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "srnkit/losses.hpp"
#include "srnkit/synth.hpp"

using namespace srnkit;

namespace {

SceneSpec quick_spec() {
    SceneSpec spec;
    spec.face_count = 6;
    spec.min_scale = 24.0;
    spec.max_scale = 200.0;
    spec.seed = 17;
    return spec;
}

}  // namespace

TEST_CASE("scene generation is deterministic") {
    const AnchorSet anchors = generate_pyramid_anchors({});
    const SceneSpec spec = quick_spec();
    const SynthScene a = synth_scene(spec, anchors);
    const SynthScene b = synth_scene(spec, anchors);
    REQUIRE(a.faces.size() == b.faces.size());
    for (std::size_t i = 0; i < a.faces.size(); ++i) {
        CHECK(a.faces[i].x1 == b.faces[i].x1);
        CHECK(a.faces[i].y2 == b.faces[i].y2);
    }
    CHECK(a.scores.first.scores == b.scores.first.scores);
    CHECK(a.scores.second.scores == b.scores.second.scores);
    CHECK(a.anchor_face == b.anchor_face);

    SceneSpec other = spec;
    other.seed = 18;
    const SynthScene c = synth_scene(other, anchors);
    CHECK(a.faces[0].x1 != c.faces[0].x1);
}

TEST_CASE("faces obey the layout constraints") {
    const AnchorSet anchors = generate_pyramid_anchors({});
    SceneSpec spec = quick_spec();
    spec.face_count = 10;
    const SynthScene scene = synth_scene(spec, anchors);
    REQUIRE(scene.faces.size() == 10);
    for (const Box& f : scene.faces) {
        CHECK(f.x1 >= 0.0);
        CHECK(f.y1 >= 0.0);
        CHECK(f.x2 <= spec.image_width);
        CHECK(f.y2 <= spec.image_height);
        const double scale = std::sqrt(f.area());
        CHECK(scale >= spec.min_scale - 1e-9);
        CHECK(scale <= spec.max_scale + 1e-9);
        CHECK(f.height() / f.width() == doctest::Approx(spec.aspect_ratio));
        CHECK(best_anchor_iou(anchors.config, f) > spec.match_iou);
    }
    for (std::size_t i = 0; i < scene.faces.size(); ++i)
        for (std::size_t j = i + 1; j < scene.faces.size(); ++j)
            CHECK(iou(scene.faces[i], scene.faces[j]) < spec.max_pair_iou);
}

TEST_CASE("best_anchor_iou matches a scan over the generated anchors") {
    PyramidConfig cfg;
    cfg.input_width = 256;
    cfg.input_height = 256;
    const AnchorSet anchors = generate_pyramid_anchors(cfg);
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const double scale = std::exp(rng.uniform(std::log(8.0), std::log(180.0)));
        const double w = scale / std::sqrt(1.25);
        const double h = scale * std::sqrt(1.25);
        const double cx = rng.uniform(w / 2, 256 - w / 2);
        const double cy = rng.uniform(h / 2, 256 - h / 2);
        const Box face = Box::from_center(cx, cy, w, h);
        double brute = 0.0;
        for (const Box& a : anchors.boxes) brute = std::max(brute, iou(a, face));
        CHECK(best_anchor_iou(cfg, face) == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("oracle scores are exactly zero or one") {
    const AnchorSet anchors = generate_pyramid_anchors({});
    SceneSpec spec = quick_spec();
    spec.oracle_scores = true;
    const SynthScene scene = synth_scene(spec, anchors);
    std::size_t matched = 0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const bool is_matched = scene.anchor_face[i] >= 0;
        matched += is_matched;
        const double want = is_matched ? 1.0 : 0.0;
        CHECK(scene.scores.first.scores[i] == want);
        CHECK(scene.scores.second.scores[i] == want);
        if (is_matched) {
            CHECK(iou(anchors.boxes[i], scene.faces[scene.anchor_face[i]]) > spec.match_iou);
        }
    }
    CHECK(matched >= scene.faces.size());  // every face was placed to match
}

TEST_CASE("matched anchors carry exact encodings at sigma zero") {
    const AnchorSet anchors = generate_pyramid_anchors({});
    SceneSpec spec = quick_spec();
    spec.oracle_scores = true;
    spec.delta_sigma = 0.0;
    const SynthScene scene = synth_scene(spec, anchors);
    int checked = 0;
    for (std::size_t i = 0; i < anchors.size() && checked < 200; ++i) {
        if (scene.anchor_face[i] < 0) continue;
        ++checked;
        const Box& face = scene.faces[scene.anchor_face[i]];
        const Box first_decode = decode(anchors.boxes[i], scene.scores.first.deltas[i]);
        CHECK(first_decode.x1 == doctest::Approx(face.x1).epsilon(1e-9));
        CHECK(first_decode.y2 == doctest::Approx(face.y2).epsilon(1e-9));

        // Second-step deltas are encoded against the refined anchor.
        const Box refined = anchors.is_low_level(i)
                                ? anchors.boxes[i]
                                : decode(anchors.boxes[i], scene.scores.first.deltas[i]);
        const Box second_decode = decode(refined, scene.scores.second.deltas[i]);
        CHECK(second_decode.x1 == doctest::Approx(face.x1).epsilon(1e-9));
        CHECK(second_decode.y2 == doctest::Approx(face.y2).epsilon(1e-9));
    }
    CHECK(checked > 0);
}

TEST_CASE("beta score model stays inside the unit interval") {
    const AnchorSet anchors = generate_pyramid_anchors({});
    SceneSpec spec = quick_spec();
    spec.face_count = 3;
    const SynthScene scene = synth_scene(spec, anchors);
    double matched_sum = 0.0, unmatched_sum = 0.0;
    std::size_t matched = 0, unmatched = 0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double s = scene.scores.second.scores[i];
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        if (scene.anchor_face[i] >= 0) {
            matched_sum += s;
            ++matched;
        } else {
            unmatched_sum += s;
            ++unmatched;
        }
    }
    REQUIRE(matched > 0);
    // Beta(8,2) vs Beta(2,8): matched anchors score high, background low.
    CHECK(matched_sum / matched > 0.6);
    CHECK(unmatched_sum / unmatched < 0.4);
}

TEST_CASE("zero faces gives pure background") {
    const AnchorSet anchors = generate_pyramid_anchors({});
    SceneSpec spec = quick_spec();
    spec.face_count = 0;
    spec.oracle_scores = true;
    const SynthScene scene = synth_scene(spec, anchors);
    CHECK(scene.faces.empty());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        CHECK(scene.anchor_face[i] == -1);
        CHECK(scene.scores.second.scores[i] == 0.0);
    }
}

TEST_CASE("impossible layouts raise an error") {
    const AnchorSet anchors = generate_pyramid_anchors({});
    SceneSpec spec;
    spec.face_count = 60;
    spec.min_scale = 300.0;
    spec.max_scale = 300.0;
    spec.max_attempts = 50;
    CHECK_THROWS_AS(synth_scene(spec, anchors), std::runtime_error);
}

TEST_CASE("spec validation") {
    SceneSpec spec;
    spec.min_scale = 100.0;
    spec.max_scale = 50.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = {};
    spec.face_count = -1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = {};
    spec.max_pair_iou = 1.5;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = {};
    spec.positive_alpha = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("synth_scores matches an external layout") {
    const AnchorSet anchors = generate_pyramid_anchors({});
    SceneSpec spec = quick_spec();
    spec.oracle_scores = true;
    // Scale 120 on a stride-64 grid center: the scale-128 anchor there
    // overlaps at 120^2/128^2, every other level stays clearly below 0.5.
    const std::vector<Box> faces = {Box::from_center(480, 480, 120 / std::sqrt(1.25),
                                                     120 * std::sqrt(1.25))};
    Rng rng(5);
    std::vector<int> anchor_face;
    const StepScores scores = synth_scores(faces, anchors, spec, rng, &anchor_face);
    REQUIRE(scores.size() == anchors.size());
    std::size_t matched = 0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (anchor_face[i] >= 0) {
            ++matched;
            CHECK(anchor_face[i] == 0);
            CHECK(iou(anchors.boxes[i], faces[0]) > spec.match_iou);
            CHECK(scores.first.scores[i] == 1.0);
        } else {
            CHECK(scores.first.scores[i] == 0.0);
        }
    }
    CHECK(matched > 0);
    // No anchor above the threshold was left unmatched.
    for (std::size_t i = 0; i < anchors.size(); ++i)
        if (anchor_face[i] < 0) CHECK(iou(anchors.boxes[i], faces[0]) <= spec.match_iou);
}
