#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace srnkit {

enum class LayerKind { Conv, MaxPool, ResidualBasicBlock };

struct LayerSpec {
    LayerKind kind = LayerKind::Conv;
    int kernel = 3;
    int stride = 1;  // 1 or 2
    int in_channels = 1;
    int out_channels = 1;
};

// Network stem as an ordered layer list; only structure, never weights.
// A residual basic block stands for two 3x3 convolutions plus a 1x1
// projection shortcut when it changes stride or channel count.
struct StemVariant {
    std::string name;
    std::vector<LayerSpec> layers;
};

// Known variants:
//   resnet_original  7x7 s2 conv to 64ch, then 3x3 s2 max pool
//   root_resnet      the 7x7 conv replaced by three 3x3 convs, first stride
//                    dropped to 1; max pool unchanged
//   new_resnet       7x7 s1 conv to 16ch, one s1 block at 16ch, one s2
//                    block to 32ch; the downsampling block replaces the pool
StemVariant build_stem(const std::string& variant_name);  // throws on unknown name

struct ShapeTraceRow {
    LayerSpec layer;
    int out_height = 0;
    int out_width = 0;
    int out_channels = 0;
    int cumulative_stride = 1;
};

// Spatial dims follow the "same" padding convention h' = ceil(h/stride).
std::vector<ShapeTraceRow> trace_shapes(const StemVariant& stem, int input_height, int input_width);

// Expands a residual basic block into its constituent convolutions.
std::vector<LayerSpec> expand_residual_block(const LayerSpec& block);

// Weight count only: k*k*in*out per convolution. Pooling and normalization
// layers contribute nothing.
std::int64_t param_count(const LayerSpec& layer);
std::int64_t param_count(const StemVariant& stem);

}  // namespace srnkit
