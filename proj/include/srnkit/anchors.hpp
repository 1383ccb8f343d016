#pragma once

#include <cstddef>
#include <vector>

#include "srnkit/box.hpp"

namespace srnkit {

// Six-level detection pyramid. Anchor scale at a level is stride times a
// multiplier; scale means sqrt(area). The two default multipliers 2 and
// 2*sqrt(2) span scales 8..362 for strides 4..128.
struct PyramidConfig {
    int input_width = 1024;
    int input_height = 1024;
    std::vector<int> strides = {4, 8, 16, 32, 64, 128};
    std::vector<double> scale_multipliers = {2.0, 2.0 * 1.4142135623730951};
    double aspect_ratio = 1.25;  // height / width
    int low_level_count = 3;     // levels 0..low_level_count-1 are the "low" levels

    std::size_t num_levels() const { return strides.size(); }
    void validate() const;  // throws std::invalid_argument on bad config
};

// All anchors over the pyramid, concatenated level by level in row-major
// grid order, multipliers innermost. Immutable after generation.
struct AnchorSet {
    PyramidConfig config;
    std::vector<Box> boxes;
    std::vector<int> levels;                  // per-anchor pyramid level
    std::vector<std::size_t> level_offsets;   // size num_levels()+1, prefix sums

    std::size_t size() const { return boxes.size(); }
    std::size_t level_count(std::size_t level) const {
        return level_offsets[level + 1] - level_offsets[level];
    }
    bool is_low_level(std::size_t anchor_index) const {
        return levels[anchor_index] < config.low_level_count;
    }
};

// Tiles anchors of scale m*S centered at (S*(i+0.5), S*(j+0.5)) over a
// ceil(W/S) x ceil(H/S) grid per level. Width = scale/sqrt(ratio),
// height = scale*sqrt(ratio), so area is scale^2 at every ratio. Anchors
// are not clipped to the image.
AnchorSet generate_pyramid_anchors(const PyramidConfig& config);

struct AnchorStats {
    std::vector<std::size_t> per_level;
    std::size_t total = 0;
    double low_level_fraction = 0.0;  // share of anchors on the low levels
};

// Count statistics straight from the tiling formula; does not materialize
// the anchors.
AnchorStats anchor_count_stats(const PyramidConfig& config);

}  // namespace srnkit
