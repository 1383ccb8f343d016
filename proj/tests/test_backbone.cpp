#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "srnkit/backbone.hpp"

using namespace srnkit;

TEST_CASE("resnet_original stem") {
    const StemVariant stem = build_stem("resnet_original");
    REQUIRE(stem.layers.size() == 2);
    CHECK(param_count(stem) == 7 * 7 * 3 * 64);

    const auto rows = trace_shapes(stem, 224, 224);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].out_height == 112);
    CHECK(rows[0].out_channels == 64);
    CHECK(rows[1].out_height == 56);
    CHECK(rows[1].cumulative_stride == 4);
}

TEST_CASE("root_resnet stem") {
    const StemVariant stem = build_stem("root_resnet");
    REQUIRE(stem.layers.size() == 4);
    CHECK(param_count(stem.layers[0]) == 3 * 3 * 3 * 64);
    CHECK(param_count(stem.layers[1]) == 3 * 3 * 64 * 64);
    CHECK(param_count(stem.layers[3]) == 0);  // pooling carries no weights
    CHECK(param_count(stem) == 75456);

    const auto rows = trace_shapes(stem, 1024, 1024);
    CHECK(rows[2].out_height == 1024);  // all convs stride 1
    CHECK(rows[3].out_height == 512);
    CHECK(rows[3].cumulative_stride == 2);
}

TEST_CASE("new_resnet stem") {
    const StemVariant stem = build_stem("new_resnet");
    REQUIRE(stem.layers.size() == 3);
    CHECK(param_count(stem.layers[0]) == 7 * 7 * 3 * 16);            // 2352
    CHECK(param_count(stem.layers[1]) == 2 * 3 * 3 * 16 * 16);       // 4608
    CHECK(param_count(stem.layers[2]) ==
          3 * 3 * 16 * 32 + 3 * 3 * 32 * 32 + 1 * 1 * 16 * 32);      // 14336
    CHECK(param_count(stem) == 21296);

    const auto rows = trace_shapes(stem, 1024, 1024);
    CHECK(rows[0].out_height == 1024);
    CHECK(rows[1].out_height == 1024);
    CHECK(rows[2].out_height == 512);
    CHECK(rows[2].out_channels == 32);
    CHECK(rows[2].cumulative_stride == 2);
}

TEST_CASE("new stem is lighter than the three-conv root") {
    CHECK(param_count(build_stem("new_resnet")) < param_count(build_stem("root_resnet")));
}

TEST_CASE("expand_residual_block") {
    const LayerSpec plain{LayerKind::ResidualBasicBlock, 3, 1, 16, 16};
    const auto convs_plain = expand_residual_block(plain);
    REQUIRE(convs_plain.size() == 2);  // identity shortcut, no projection
    CHECK(convs_plain[0].stride == 1);
    CHECK(convs_plain[1].in_channels == 16);

    const LayerSpec down{LayerKind::ResidualBasicBlock, 3, 2, 16, 32};
    const auto convs_down = expand_residual_block(down);
    REQUIRE(convs_down.size() == 3);
    CHECK(convs_down[0].stride == 2);
    CHECK(convs_down[2].kernel == 1);  // projection shortcut
    CHECK(convs_down[2].stride == 2);
    CHECK(convs_down[2].in_channels == 16);
    CHECK(convs_down[2].out_channels == 32);

    // Channel change alone also needs the projection.
    const LayerSpec widen{LayerKind::ResidualBasicBlock, 3, 1, 16, 32};
    CHECK(expand_residual_block(widen).size() == 3);

    CHECK_THROWS_AS(expand_residual_block(LayerSpec{LayerKind::Conv, 3, 1, 3, 8}),
                    std::invalid_argument);
}

TEST_CASE("shape trace uses ceiling division") {
    const StemVariant stem = build_stem("resnet_original");
    const auto rows = trace_shapes(stem, 225, 99);
    CHECK(rows[0].out_height == 113);
    CHECK(rows[0].out_width == 50);
    CHECK(rows[1].out_height == 57);
    CHECK(rows[1].out_width == 25);

    CHECK_THROWS_AS(trace_shapes(stem, 0, 10), std::invalid_argument);
    CHECK_THROWS_AS(build_stem("vgg"), std::invalid_argument);
}
