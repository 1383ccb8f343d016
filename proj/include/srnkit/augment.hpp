#pragma once

#include <cstddef>
#include <vector>

#include "srnkit/box.hpp"
#include "srnkit/image.hpp"
#include "srnkit/rng.hpp"

namespace srnkit {

struct AugmentConfig {
    int output_size = 1024;
    double das_probability = 0.5;
    std::vector<double> anchor_scale_set = {16, 32, 64, 128, 256, 512};
    double das_jitter_lo = 0.75;
    double das_jitter_hi = 1.25;
    double expand_max_ratio = 4.0;
    double crop_min_fraction = 0.3;   // crop side as a fraction of the short image side
    int crop_retries = 50;
    bool allow_faceless_crop = true;

    // Photometric jitter ranges, each distortion applied with probability 1/2.
    double brightness_delta = 32.0;   // max absolute delta in 8-bit units
    double contrast_lo = 0.5;
    double contrast_hi = 1.5;
    double saturation_lo = 0.5;
    double saturation_hi = 1.5;
    double hue_delta_deg = 18.0;

    void validate() const;
};

// Brightness / contrast / saturation / hue jitter, in that order, samples
// clamped to [0,255]. Annotations are untouched by design.
ImageBuffer photometric_distort(const ImageBuffer& img, Rng& rng, const AugmentConfig& cfg);

struct ImageWithBoxes {
    ImageBuffer image;
    std::vector<Box> boxes;
};

// Zero-padded canvas `ratio` times the input, original placed at (offset_x,
// offset_y), boxes translated along.
ImageWithBoxes expand_to(const ImageBuffer& img, const std::vector<Box>& boxes, double ratio,
                         long offset_x, long offset_y);
ImageWithBoxes expand(const ImageBuffer& img, const std::vector<Box>& boxes, Rng& rng,
                      const AugmentConfig& cfg);

// Square crop at (x, y) with the given side; boxes are retained iff their
// center lies inside the patch, then translated and clipped.
ImageWithBoxes crop_patch(const ImageBuffer& img, const std::vector<Box>& boxes, long x, long y,
                          int side);

// Side drawn in [crop_min_fraction, 1] x the short image side, position
// uniform. Redraws up to crop_retries times until at least one box
// survives, then falls back to the centered full-short-side crop.
ImageWithBoxes random_crop(const ImageBuffer& img, const std::vector<Box>& boxes, Rng& rng,
                           const AugmentConfig& cfg);

// The random choices behind one data-anchor-sampling step, separated out so
// the geometry is testable without an RNG. placement_* pick the window
// origin within its feasible range as a fraction (0.5 = centered).
struct DasDraw {
    std::size_t face_index = 0;
    int target_scale_index = 0;
    double jitter = 1.0;
    double placement_x = 0.5;
    double placement_y = 0.5;
};

struct DasResult {
    ImageBuffer image;                 // output_size x output_size
    std::vector<Box> boxes;
    double factor = 1.0;               // image/box scale factor applied
    double target_scale = 0.0;         // anchor_scale_set[target] picked for the face
    std::size_t face_output_index = 0; // position of the chosen face in `boxes`
};

// Index of the anchor scale closest to `face_scale` (ties to the lower index).
int nearest_scale_index(const std::vector<double>& scale_set, double face_scale);

// Rescales the image so the chosen face lands at target_scale * jitter,
// then crops an output_size window containing that face, uniformly among
// valid placements; the window is clipped to the scaled image where
// possible and zero-padded where the image is smaller.
DasResult data_anchor_sample(const ImageBuffer& img, const std::vector<Box>& boxes,
                             const DasDraw& draw, const AugmentConfig& cfg);
DasResult data_anchor_sample(const ImageBuffer& img, const std::vector<Box>& boxes, Rng& rng,
                             const AugmentConfig& cfg);

struct AugmentResult {
    ImageBuffer image;       // always output_size x output_size
    std::vector<Box> boxes;  // valid, in-frame; degenerate leftovers dropped
    bool used_das = false;
    // Meaningful only when used_das:
    double das_factor = 1.0;
    double das_target_scale = 0.0;
    std::size_t das_face_output_index = 0;
};

// Photometric distortion always; then either data-anchor-sampling (with
// probability das_probability, when boxes exist) or expand -> random crop
// -> resize to the output square.
AugmentResult augment_pipeline(const ImageBuffer& img, const std::vector<Box>& boxes, Rng& rng,
                               const AugmentConfig& cfg);

}  // namespace srnkit
