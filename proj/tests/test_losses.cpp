#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "srnkit/losses.hpp"

using namespace srnkit;

TEST_CASE("encode of the anchor itself is zero") {
    const Box anchor{10, 20, 30, 50};
    const BoxDelta d = encode(anchor, anchor);
    CHECK(d.dx == 0.0);
    CHECK(d.dy == 0.0);
    CHECK(d.dw == 0.0);
    CHECK(d.dh == 0.0);
    const Box back = decode(anchor, d);
    CHECK(back.x1 == doctest::Approx(anchor.x1));
    CHECK(back.y2 == doctest::Approx(anchor.y2));
}

TEST_CASE("encode components") {
    const Box anchor = Box::from_center(0, 0, 10, 20);
    const Box gt = Box::from_center(5, -10, 20, 10);
    const BoxDelta d = encode(gt, anchor);
    CHECK(d.dx == doctest::Approx(0.5));
    CHECK(d.dy == doctest::Approx(-0.5));
    CHECK(d.dw == doctest::Approx(std::log(2.0)));
    CHECK(d.dh == doctest::Approx(std::log(0.5)));
}

TEST_CASE("round trip over random pairs") {
    // Size ratios stay under the decode clamp (exp(4) < 1000/16) so the
    // trip is lossless.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pos(-500.0, 500.0);
    std::uniform_real_distribution<double> size(0.5, 400.0);
    std::uniform_real_distribution<double> log_ratio(-4.0, 4.0);
    for (int i = 0; i < 2000; ++i) {
        const double aw = size(rng), ah = size(rng);
        const Box anchor = Box::from_center(pos(rng), pos(rng), aw, ah);
        const Box gt = Box::from_center(pos(rng), pos(rng), aw * std::exp(log_ratio(rng)),
                                        ah * std::exp(log_ratio(rng)));
        const Box back = decode(anchor, encode(gt, anchor));
        CHECK(back.x1 == doctest::Approx(gt.x1).epsilon(1e-9));
        CHECK(back.y1 == doctest::Approx(gt.y1).epsilon(1e-9));
        CHECK(back.x2 == doctest::Approx(gt.x2).epsilon(1e-9));
        CHECK(back.y2 == doctest::Approx(gt.y2).epsilon(1e-9));
    }
}

TEST_CASE("decode clamps the log-size deltas") {
    const Box anchor = Box::from_center(0, 0, 16, 16);
    const Box huge = decode(anchor, BoxDelta{0, 0, 50.0, -50.0});
    CHECK(huge.width() == doctest::Approx(16.0 * 1000.0 / 16.0));  // e^ln(1000/16) = 62.5x
    CHECK(huge.height() == doctest::Approx(16.0 * 16.0 / 1000.0));
    // Center offsets are not clamped.
    const Box moved = decode(anchor, BoxDelta{100.0, 0, 0, 0});
    CHECK(moved.center_x() == doctest::Approx(1600.0));
}

TEST_CASE("encode and decode reject degenerate boxes") {
    const Box good{0, 0, 10, 10};
    const Box flat{0, 0, 10, 0};
    CHECK_THROWS_AS(encode(flat, good), std::invalid_argument);
    CHECK_THROWS_AS(encode(good, flat), std::invalid_argument);
    CHECK_THROWS_AS(decode(flat, BoxDelta{}), std::invalid_argument);
}

TEST_CASE("focal loss formula") {
    LossConfig cfg;
    // Defaults alpha 0.25, gamma 2.
    CHECK(focal_loss(0.5, true, cfg) ==
          doctest::Approx(-0.25 * 0.25 * std::log(0.5)).epsilon(1e-12));
    CHECK(focal_loss(0.5, false, cfg) ==
          doctest::Approx(-0.75 * 0.25 * std::log(0.5)).epsilon(1e-12));

    // gamma 0 removes the modulation entirely.
    cfg.focal_gamma = 0.0;
    cfg.focal_alpha = 1.0;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> prob(1e-6, 1.0 - 1e-6);
    for (int i = 0; i < 200; ++i) {
        const double p = prob(rng);
        CHECK(focal_loss(p, true, cfg) == doctest::Approx(-std::log(p)).epsilon(1e-12));
    }
    cfg.focal_alpha = 0.5;
    for (int i = 0; i < 200; ++i) {
        const double p = prob(rng);
        CHECK(focal_loss(p, false, cfg) ==
              doctest::Approx(-0.5 * std::log(1.0 - p)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(focal_loss(0.0, true, LossConfig{}), std::invalid_argument);
    CHECK_THROWS_AS(focal_loss(1.0, true, LossConfig{}), std::invalid_argument);
}

TEST_CASE("focal gradient matches finite differences") {
    LossConfig cfg;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> prob(0.01, 0.99);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        const double p = prob(rng);
        for (bool positive : {true, false}) {
            const double fd =
                (focal_loss(p + h, positive, cfg) - focal_loss(p - h, positive, cfg)) / (2 * h);
            CHECK(focal_loss_grad(p, positive, cfg) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("smooth l1") {
    // Quadratic inside the beta window, linear outside, continuous at the joint.
    CHECK(smooth_l1(BoxDelta{0.5, 0, 0, 0}, BoxDelta{}, 1.0) == doctest::Approx(0.125));
    CHECK(smooth_l1(BoxDelta{2.0, 0, 0, 0}, BoxDelta{}, 1.0) == doctest::Approx(1.5));
    CHECK(smooth_l1(BoxDelta{1.0, 0, 0, 0}, BoxDelta{}, 1.0) == doctest::Approx(0.5));
    const double just_in = smooth_l1(BoxDelta{1.0 - 1e-9, 0, 0, 0}, BoxDelta{}, 1.0);
    CHECK(just_in == doctest::Approx(0.5).epsilon(1e-6));

    // Componentwise sum.
    CHECK(smooth_l1(BoxDelta{0.5, 0.5, 0.5, 0.5}, BoxDelta{}, 1.0) == doctest::Approx(0.5));
    // Beta scales the quadratic region.
    CHECK(smooth_l1(BoxDelta{0.5, 0, 0, 0}, BoxDelta{}, 2.0) == doctest::Approx(0.0625));
    CHECK_THROWS_AS(smooth_l1(BoxDelta{}, BoxDelta{}, 0.0), std::invalid_argument);
}

TEST_CASE("total loss hand-computed") {
    // Four anchors: two low (level 0), two high (level 5).
    const std::vector<int> levels = {0, 0, 5, 5};
    const int low_count = 3;
    LossConfig cfg;
    cfg.focal_alpha = 0.5;
    cfg.focal_gamma = 0.0;
    cfg.smooth_l1_beta = 1.0;

    StepLossInput s1;
    s1.scores = {0.8, 0.2, 0.9, 0.1};
    s1.labels = {0, MatchResult::kNegative, 0, MatchResult::kNegative};
    s1.deltas = {BoxDelta{}, BoxDelta{}, BoxDelta{0.5, 0, 0, 0}, BoxDelta{}};
    s1.targets = {BoxDelta{}, BoxDelta{}, BoxDelta{}, BoxDelta{}};

    StepLossInput s2 = s1;
    s2.scores = {0.7, 0.3, 0.6, 0.4};
    s2.deltas = {BoxDelta{1.0, 0, 0, 0}, BoxDelta{}, BoxDelta{2.0, 0, 0, 0}, BoxDelta{}};

    // Step 1: classification over low anchors only (0 and 1), regression over
    // high positives only (anchor 2). Two positives in the step.
    const double s1_cls = 0.5 * (-std::log(0.8) - std::log(1.0 - 0.2));
    const double s1_reg = 0.125;
    // Step 2: everything participates.
    const double s2_cls = 0.5 * (-std::log(0.7) - std::log(1.0 - 0.3) - std::log(0.6) -
                                 std::log(1.0 - 0.4));
    const double s2_reg = 0.5 + 1.5;
    const double expected = (s1_cls + s1_reg) / 2.0 + (s2_cls + s2_reg) / 2.0;

    CHECK(total_loss(s1, s2, levels, low_count, cfg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ignored anchors contribute nothing") {
    const std::vector<int> levels = {0, 5};
    StepLossInput active;
    active.scores = {0.3, 0.6};
    active.labels = {MatchResult::kIgnored, MatchResult::kIgnored};
    active.deltas = {BoxDelta{1, 1, 1, 1}, BoxDelta{1, 1, 1, 1}};
    active.targets = {BoxDelta{}, BoxDelta{}};
    CHECK(total_loss(active, active, levels, 1, LossConfig{}) == 0.0);
}

TEST_CASE("positive count floors at one") {
    // All negatives: denominators must not divide by zero.
    const std::vector<int> levels = {0, 5};
    StepLossInput neg;
    neg.scores = {0.5, 0.5};
    neg.labels = {MatchResult::kNegative, MatchResult::kNegative};
    neg.deltas = {BoxDelta{}, BoxDelta{}};
    neg.targets = {BoxDelta{}, BoxDelta{}};
    LossConfig cfg;
    cfg.focal_alpha = 0.5;
    cfg.focal_gamma = 0.0;
    // Step1 cls: only the low anchor; step2 cls: both anchors. All divided by 1.
    const double expected = 0.5 * -std::log(0.5) + 2 * 0.5 * -std::log(0.5);
    CHECK(total_loss(neg, neg, levels, 1, cfg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("total loss validates array sizes") {
    const std::vector<int> levels = {0, 5};
    StepLossInput bad;
    bad.scores = {0.5};
    bad.labels = {0, 0};
    bad.deltas = {BoxDelta{}, BoxDelta{}};
    bad.targets = {BoxDelta{}, BoxDelta{}};
    StepLossInput ok;
    ok.scores = {0.5, 0.5};
    ok.labels = {0, 0};
    ok.deltas = {BoxDelta{}, BoxDelta{}};
    ok.targets = {BoxDelta{}, BoxDelta{}};
    CHECK_THROWS_AS(total_loss(bad, ok, levels, 1, LossConfig{}), std::invalid_argument);
}

TEST_CASE("score clamping keeps extreme scores finite") {
    const std::vector<int> levels = {0, 5};
    StepLossInput extreme;
    extreme.scores = {0.0, 1.0};  // would throw unclamped
    extreme.labels = {0, MatchResult::kNegative};
    extreme.deltas = {BoxDelta{}, BoxDelta{}};
    extreme.targets = {BoxDelta{}, BoxDelta{}};
    const double v = total_loss(extreme, extreme, levels, 1, LossConfig{});
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
}
