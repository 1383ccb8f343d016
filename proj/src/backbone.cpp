#include "srnkit/backbone.hpp"

#include <stdexcept>

namespace srnkit {

static LayerSpec conv(int kernel, int stride, int in_ch, int out_ch) {
    return LayerSpec{LayerKind::Conv, kernel, stride, in_ch, out_ch};
}

static LayerSpec maxpool(int kernel, int stride, int ch) {
    return LayerSpec{LayerKind::MaxPool, kernel, stride, ch, ch};
}

static LayerSpec block(int stride, int in_ch, int out_ch) {
    return LayerSpec{LayerKind::ResidualBasicBlock, 3, stride, in_ch, out_ch};
}

StemVariant build_stem(const std::string& variant_name) {
    if (variant_name == "resnet_original") {
        return StemVariant{variant_name, {conv(7, 2, 3, 64), maxpool(3, 2, 64)}};
    }
    if (variant_name == "root_resnet") {
        return StemVariant{variant_name,
                           {conv(3, 1, 3, 64), conv(3, 1, 64, 64), conv(3, 1, 64, 64),
                            maxpool(3, 2, 64)}};
    }
    if (variant_name == "new_resnet") {
        return StemVariant{variant_name,
                           {conv(7, 1, 3, 16), block(1, 16, 16), block(2, 16, 32)}};
    }
    throw std::invalid_argument("build_stem: unknown variant '" + variant_name + "'");
}

static int ceil_div(int a, int b) { return (a + b - 1) / b; }

std::vector<ShapeTraceRow> trace_shapes(const StemVariant& stem, int input_height, int input_width) {
    if (input_height < 1 || input_width < 1)
        throw std::invalid_argument("trace_shapes: input dimensions must be positive");
    std::vector<ShapeTraceRow> rows;
    rows.reserve(stem.layers.size());
    int h = input_height;
    int w = input_width;
    int cum = 1;
    for (const LayerSpec& layer : stem.layers) {
        h = ceil_div(h, layer.stride);
        w = ceil_div(w, layer.stride);
        cum *= layer.stride;
        rows.push_back(ShapeTraceRow{layer, h, w, layer.out_channels, cum});
    }
    return rows;
}

std::vector<LayerSpec> expand_residual_block(const LayerSpec& b) {
    if (b.kind != LayerKind::ResidualBasicBlock)
        throw std::invalid_argument("expand_residual_block: not a residual block");
    std::vector<LayerSpec> convs = {conv(3, b.stride, b.in_channels, b.out_channels),
                                    conv(3, 1, b.out_channels, b.out_channels)};
    if (b.stride != 1 || b.in_channels != b.out_channels)
        convs.push_back(conv(1, b.stride, b.in_channels, b.out_channels));
    return convs;
}

std::int64_t param_count(const LayerSpec& layer) {
    switch (layer.kind) {
        case LayerKind::Conv:
            return static_cast<std::int64_t>(layer.kernel) * layer.kernel * layer.in_channels *
                   layer.out_channels;
        case LayerKind::MaxPool:
            return 0;
        case LayerKind::ResidualBasicBlock: {
            std::int64_t total = 0;
            for (const LayerSpec& c : expand_residual_block(layer)) total += param_count(c);
            return total;
        }
    }
    return 0;
}

std::int64_t param_count(const StemVariant& stem) {
    std::int64_t total = 0;
    for (const LayerSpec& layer : stem.layers) total += param_count(layer);
    return total;
}

}  // namespace srnkit
