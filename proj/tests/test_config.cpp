#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "srnkit/config.hpp"

using namespace srnkit;

TEST_CASE("print and parse round trip byte-identically") {
    RunConfig cfg;
    const std::string text = print_config(cfg);
    std::stringstream in(text);
    const RunConfig back = parse_config(in);
    CHECK(print_config(back) == text);
    CHECK(text.back() == '\n');
}

TEST_CASE("round trip survives non-default values") {
    RunConfig cfg;
    cfg.pyramid.input_width = 640;
    cfg.pyramid.strides = {8, 16, 32};
    cfg.pyramid.low_level_count = 2;
    cfg.loss.focal_gamma = 1.5;
    cfg.augment.das_probability = 0.25;
    cfg.augment.allow_faceless_crop = false;
    cfg.inference.top_k = 500;
    cfg.step2 = MatchThresholds{0.6, 0.45};
    cfg.seed = 99;
    const std::string text = print_config(cfg);
    std::stringstream in(text);
    const RunConfig back = parse_config(in);
    CHECK(print_config(back) == text);
    CHECK(back.pyramid.strides == std::vector<int>{8, 16, 32});
    CHECK(back.augment.allow_faceless_crop == false);
    CHECK(back.step2.theta_p == 0.6);
    CHECK(back.seed == 99);
}

TEST_CASE("comments, blanks, and overrides") {
    std::stringstream in(
        "# comment only\n"
        "\n"
        "seed = 5\n"
        "inference.top_k = 100   # trailing comment\n"
        "seed = 7\n");
    const RunConfig cfg = parse_config(in);
    CHECK(cfg.seed == 7);
    CHECK(cfg.inference.top_k == 100);
}

TEST_CASE("unknown keys are named in the error") {
    std::stringstream in("inference.banana = 1\n");
    try {
        parse_config(in);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("inference.banana") != std::string::npos);
    }
}

TEST_CASE("malformed lines and values") {
    std::stringstream no_eq("seed 5\n");
    CHECK_THROWS_AS(parse_config(no_eq), std::invalid_argument);
    std::stringstream bad_int("inference.top_k = many\n");
    CHECK_THROWS_AS(parse_config(bad_int), std::invalid_argument);
    std::stringstream bad_bool("augment.allow_faceless_crop = maybe\n");
    CHECK_THROWS_AS(parse_config(bad_bool), std::invalid_argument);
    std::stringstream bad_list("pyramid.strides = 4,x,16\n");
    CHECK_THROWS_AS(parse_config(bad_list), std::invalid_argument);
}

TEST_CASE("parsed configs are validated") {
    std::stringstream in("match.step1_theta_p = 0.2\nmatch.step1_theta_n = 0.6\n");
    CHECK_THROWS_AS(parse_config(in), std::invalid_argument);
    std::stringstream in2("loss.focal_alpha = 2.0\n");
    CHECK_THROWS_AS(parse_config(in2), std::invalid_argument);
    std::stringstream in3("pyramid.strides = 16,8\n");
    CHECK_THROWS_AS(parse_config(in3), std::invalid_argument);
}

TEST_CASE("base config carries through") {
    RunConfig base;
    base.seed = 41;
    base.inference.cap = 10;
    std::stringstream in("inference.cap = 20\n");
    const RunConfig cfg = parse_config(in, base);
    CHECK(cfg.seed == 41);       // untouched key keeps the base value
    CHECK(cfg.inference.cap == 20);
}

TEST_CASE("apply_config_entry handles each value type") {
    RunConfig cfg;
    apply_config_entry(cfg, "pyramid.aspect_ratio", "1.5");
    CHECK(cfg.pyramid.aspect_ratio == 1.5);
    apply_config_entry(cfg, "augment.allow_faceless_crop", "false");
    CHECK_FALSE(cfg.augment.allow_faceless_crop);
    apply_config_entry(cfg, "augment.allow_faceless_crop", "1");
    CHECK(cfg.augment.allow_faceless_crop);
    apply_config_entry(cfg, "pyramid.scale_multipliers", "2,3");
    CHECK(cfg.pyramid.scale_multipliers == std::vector<double>{2.0, 3.0});
    apply_config_entry(cfg, "seed", "18446744073709551615");  // uint64 max
    CHECK(cfg.seed == 18446744073709551615ULL);
    CHECK_THROWS_AS(apply_config_entry(cfg, "nope", "1"), std::invalid_argument);
}
