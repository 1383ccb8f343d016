#include "srnkit/anchors.hpp"

#include <cmath>
#include <stdexcept>

namespace srnkit {

void PyramidConfig::validate() const {
    if (input_width < 1 || input_height < 1)
        throw std::invalid_argument("PyramidConfig: input dimensions must be >= 1");
    if (strides.empty())
        throw std::invalid_argument("PyramidConfig: at least one stride required");
    int prev = 0;
    for (int s : strides) {
        if (s <= prev)
            throw std::invalid_argument("PyramidConfig: strides must be positive and strictly increasing");
        prev = s;
    }
    if (scale_multipliers.empty())
        throw std::invalid_argument("PyramidConfig: at least one scale multiplier required");
    for (double m : scale_multipliers)
        if (m <= 0.0)
            throw std::invalid_argument("PyramidConfig: scale multipliers must be positive");
    if (aspect_ratio <= 0.0)
        throw std::invalid_argument("PyramidConfig: aspect ratio must be positive");
    if (low_level_count < 1 || low_level_count >= static_cast<int>(strides.size()))
        throw std::invalid_argument("PyramidConfig: low_level_count must be in [1, num_levels)");
}

static std::size_t grid_cells(int extent, int stride) {
    return static_cast<std::size_t>((extent + stride - 1) / stride);
}

AnchorSet generate_pyramid_anchors(const PyramidConfig& config) {
    config.validate();

    AnchorSet set;
    set.config = config;
    const AnchorStats stats = anchor_count_stats(config);
    set.boxes.reserve(stats.total);
    set.levels.reserve(stats.total);
    set.level_offsets.reserve(config.num_levels() + 1);
    set.level_offsets.push_back(0);

    const double root_ratio = std::sqrt(config.aspect_ratio);
    for (std::size_t level = 0; level < config.num_levels(); ++level) {
        const int stride = config.strides[level];
        const std::size_t cols = grid_cells(config.input_width, stride);
        const std::size_t rows = grid_cells(config.input_height, stride);
        for (std::size_t j = 0; j < rows; ++j) {
            const double cy = stride * (static_cast<double>(j) + 0.5);
            for (std::size_t i = 0; i < cols; ++i) {
                const double cx = stride * (static_cast<double>(i) + 0.5);
                for (double m : config.scale_multipliers) {
                    const double scale = m * stride;
                    const double w = scale / root_ratio;
                    const double h = scale * root_ratio;
                    set.boxes.push_back(Box::from_center(cx, cy, w, h));
                    set.levels.push_back(static_cast<int>(level));
                }
            }
        }
        set.level_offsets.push_back(set.boxes.size());
    }
    return set;
}

AnchorStats anchor_count_stats(const PyramidConfig& config) {
    config.validate();
    AnchorStats stats;
    stats.per_level.reserve(config.num_levels());
    std::size_t low_total = 0;
    for (std::size_t level = 0; level < config.num_levels(); ++level) {
        const int stride = config.strides[level];
        const std::size_t n = grid_cells(config.input_width, stride) *
                              grid_cells(config.input_height, stride) *
                              config.scale_multipliers.size();
        stats.per_level.push_back(n);
        stats.total += n;
        if (level < static_cast<std::size_t>(config.low_level_count)) low_total += n;
    }
    stats.low_level_fraction = static_cast<double>(low_total) / static_cast<double>(stats.total);
    return stats;
}

}  // namespace srnkit
