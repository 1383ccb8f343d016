#include "srnkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace srnkit {
namespace {

struct Hsv {
    double h;  // degrees [0, 360)
    double s;  // [0, 1]
    double v;  // [0, 1]
};

Hsv rgb_to_hsv(double r, double g, double b) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    Hsv out{0.0, 0.0, mx};
    if (mx > 0.0) out.s = d / mx;
    if (d > 0.0) {
        if (mx == r) {
            out.h = 60.0 * ((g - b) / d);
        } else if (mx == g) {
            out.h = 60.0 * ((b - r) / d + 2.0);
        } else {
            out.h = 60.0 * ((r - g) / d + 4.0);
        }
        if (out.h < 0.0) out.h += 360.0;
    }
    return out;
}

void hsv_to_rgb(const Hsv& in, double& r, double& g, double& b) {
    const double c = in.v * in.s;
    const double hp = in.h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double rp = 0.0, gp = 0.0, bp = 0.0;
    if (hp < 1.0) {
        rp = c; gp = x;
    } else if (hp < 2.0) {
        rp = x; gp = c;
    } else if (hp < 3.0) {
        gp = c; bp = x;
    } else if (hp < 4.0) {
        gp = x; bp = c;
    } else if (hp < 5.0) {
        rp = x; bp = c;
    } else {
        rp = c; bp = x;
    }
    const double m = in.v - c;
    r = rp + m;
    g = gp + m;
    b = bp + m;
}

std::uint8_t to_byte(double v) {
    const long r = std::lround(v);
    return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

bool center_inside(const Box& b, double x1, double y1, double x2, double y2) {
    const double cx = b.center_x();
    const double cy = b.center_y();
    return cx >= x1 && cx < x2 && cy >= y1 && cy < y2;
}

// Translates boxes into patch coordinates, keeps those whose center lies in
// the patch, clips, drops anything degenerate. Reports where `track` ended
// up, or npos if it did not survive.
std::vector<Box> retain_for_patch(const std::vector<Box>& boxes, double patch_x, double patch_y,
                                  double patch_w, double patch_h, std::size_t track,
                                  std::size_t& track_out) {
    std::vector<Box> out;
    track_out = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Box& b = boxes[i];
        if (!center_inside(b, patch_x, patch_y, patch_x + patch_w, patch_y + patch_h)) continue;
        Box moved{b.x1 - patch_x, b.y1 - patch_y, b.x2 - patch_x, b.y2 - patch_y};
        moved = clip_box(moved, patch_w, patch_h);
        if (moved.degenerate()) continue;
        if (i == track) track_out = out.size();
        out.push_back(moved);
    }
    return out;
}

long scaled_extent(int extent, double factor) {
    return std::max(1L, std::lround(extent * factor));
}

}  // namespace

void AugmentConfig::validate() const {
    if (output_size <= 0) throw std::invalid_argument("augment: output_size must be positive");
    if (!(das_probability >= 0.0 && das_probability <= 1.0))
        throw std::invalid_argument("augment: das_probability must lie in [0, 1]");
    if (anchor_scale_set.empty())
        throw std::invalid_argument("augment: anchor_scale_set must not be empty");
    for (double s : anchor_scale_set)
        if (!(s > 0.0)) throw std::invalid_argument("augment: anchor scales must be positive");
    if (!std::is_sorted(anchor_scale_set.begin(), anchor_scale_set.end()))
        throw std::invalid_argument("augment: anchor_scale_set must be ascending");
    if (!(das_jitter_lo > 0.0 && das_jitter_hi >= das_jitter_lo))
        throw std::invalid_argument("augment: bad jitter range");
    if (!(expand_max_ratio >= 1.0))
        throw std::invalid_argument("augment: expand_max_ratio must be >= 1");
    if (!(crop_min_fraction > 0.0 && crop_min_fraction <= 1.0))
        throw std::invalid_argument("augment: crop_min_fraction must lie in (0, 1]");
    if (crop_retries < 1) throw std::invalid_argument("augment: crop_retries must be positive");
    if (!(brightness_delta >= 0.0))
        throw std::invalid_argument("augment: brightness_delta must be non-negative");
    if (!(contrast_lo > 0.0 && contrast_hi >= contrast_lo))
        throw std::invalid_argument("augment: bad contrast range");
    if (!(saturation_lo > 0.0 && saturation_hi >= saturation_lo))
        throw std::invalid_argument("augment: bad saturation range");
    if (!(hue_delta_deg >= 0.0 && hue_delta_deg <= 180.0))
        throw std::invalid_argument("augment: hue_delta_deg must lie in [0, 180]");
}

ImageBuffer photometric_distort(const ImageBuffer& img, Rng& rng, const AugmentConfig& cfg) {
    cfg.validate();

    bool do_brightness = rng.bernoulli(0.5);
    const double brightness = do_brightness ? rng.uniform(-cfg.brightness_delta, cfg.brightness_delta) : 0.0;
    bool do_contrast = rng.bernoulli(0.5);
    const double contrast = do_contrast ? rng.uniform(cfg.contrast_lo, cfg.contrast_hi) : 1.0;
    bool do_saturation = rng.bernoulli(0.5);
    const double saturation = do_saturation ? rng.uniform(cfg.saturation_lo, cfg.saturation_hi) : 1.0;
    bool do_hue = rng.bernoulli(0.5);
    const double hue = do_hue ? rng.uniform(-cfg.hue_delta_deg, cfg.hue_delta_deg) : 0.0;

    ImageBuffer out(img.width, img.height);
    const bool use_hsv = do_saturation || do_hue;
    for (std::size_t p = 0; p < img.data.size(); p += 3) {
        double r = img.data[p + 0];
        double g = img.data[p + 1];
        double b = img.data[p + 2];
        if (do_brightness) {
            r += brightness;
            g += brightness;
            b += brightness;
        }
        if (do_contrast) {
            r *= contrast;
            g *= contrast;
            b *= contrast;
        }
        if (use_hsv) {
            Hsv hsv = rgb_to_hsv(std::clamp(r, 0.0, 255.0) / 255.0, std::clamp(g, 0.0, 255.0) / 255.0,
                                 std::clamp(b, 0.0, 255.0) / 255.0);
            hsv.s = std::clamp(hsv.s * saturation, 0.0, 1.0);
            hsv.h = std::fmod(hsv.h + hue, 360.0);
            if (hsv.h < 0.0) hsv.h += 360.0;
            hsv_to_rgb(hsv, r, g, b);
            r *= 255.0;
            g *= 255.0;
            b *= 255.0;
        }
        out.data[p + 0] = to_byte(r);
        out.data[p + 1] = to_byte(g);
        out.data[p + 2] = to_byte(b);
    }
    return out;
}

ImageWithBoxes expand_to(const ImageBuffer& img, const std::vector<Box>& boxes, double ratio,
                         long offset_x, long offset_y) {
    if (!(ratio >= 1.0)) throw std::invalid_argument("expand: ratio must be >= 1");
    const int out_w = static_cast<int>(img.width * ratio);
    const int out_h = static_cast<int>(img.height * ratio);
    if (offset_x < 0 || offset_y < 0 || offset_x + img.width > out_w || offset_y + img.height > out_h)
        throw std::invalid_argument("expand: offset places the image outside the canvas");

    ImageBuffer out(out_w, out_h);
    for (int y = 0; y < img.height; ++y) {
        std::memcpy(&out.at(static_cast<int>(offset_x), static_cast<int>(offset_y) + y, 0),
                    &img.data[static_cast<std::size_t>(y) * img.width * 3],
                    static_cast<std::size_t>(img.width) * 3);
    }
    ImageWithBoxes result{std::move(out), {}};
    result.boxes.reserve(boxes.size());
    for (const Box& b : boxes)
        result.boxes.push_back({b.x1 + offset_x, b.y1 + offset_y, b.x2 + offset_x, b.y2 + offset_y});
    return result;
}

ImageWithBoxes expand(const ImageBuffer& img, const std::vector<Box>& boxes, Rng& rng,
                      const AugmentConfig& cfg) {
    cfg.validate();
    const double ratio = rng.uniform(1.0, cfg.expand_max_ratio);
    const int out_w = static_cast<int>(img.width * ratio);
    const int out_h = static_cast<int>(img.height * ratio);
    const long ox = rng.uniform_int(0, static_cast<long>(out_w - img.width));
    const long oy = rng.uniform_int(0, static_cast<long>(out_h - img.height));
    return expand_to(img, boxes, ratio, ox, oy);
}

ImageWithBoxes crop_patch(const ImageBuffer& img, const std::vector<Box>& boxes, long x, long y,
                          int side) {
    if (side <= 0) throw std::invalid_argument("crop_patch: side must be positive");
    ImageWithBoxes out;
    out.image = crop(img, x, y, side, side);
    std::size_t unused;
    out.boxes = retain_for_patch(boxes, static_cast<double>(x), static_cast<double>(y),
                                 static_cast<double>(side), static_cast<double>(side),
                                 std::numeric_limits<std::size_t>::max(), unused);
    return out;
}

ImageWithBoxes random_crop(const ImageBuffer& img, const std::vector<Box>& boxes, Rng& rng,
                           const AugmentConfig& cfg) {
    cfg.validate();
    const int short_side = std::min(img.width, img.height);
    for (int attempt = 0; attempt < cfg.crop_retries; ++attempt) {
        const double frac = rng.uniform(cfg.crop_min_fraction, 1.0);
        const int side = std::max(1, static_cast<int>(frac * short_side));
        const long x = rng.uniform_int(0, static_cast<long>(img.width - side));
        const long y = rng.uniform_int(0, static_cast<long>(img.height - side));
        ImageWithBoxes candidate = crop_patch(img, boxes, x, y, side);
        if (!candidate.boxes.empty() || boxes.empty()) return candidate;
    }
    if (!cfg.allow_faceless_crop)
        throw std::runtime_error("random_crop: no face retained after retries");
    // Fall back to the largest centered square so the output is at least
    // maximally informative.
    const long cx = (img.width - short_side) / 2;
    const long cy = (img.height - short_side) / 2;
    return crop_patch(img, boxes, cx, cy, short_side);
}

int nearest_scale_index(const std::vector<double>& scale_set, double face_scale) {
    if (scale_set.empty()) throw std::invalid_argument("nearest_scale_index: empty scale set");
    if (!(face_scale > 0.0))
        throw std::invalid_argument("nearest_scale_index: face scale must be positive");
    int best = 0;
    double best_dist = std::abs(scale_set[0] - face_scale);
    for (std::size_t i = 1; i < scale_set.size(); ++i) {
        const double d = std::abs(scale_set[i] - face_scale);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

DasResult data_anchor_sample(const ImageBuffer& img, const std::vector<Box>& boxes,
                             const DasDraw& draw, const AugmentConfig& cfg) {
    cfg.validate();
    if (boxes.empty()) throw std::invalid_argument("data_anchor_sample: no boxes to sample from");
    if (draw.face_index >= boxes.size())
        throw std::invalid_argument("data_anchor_sample: face_index out of range");
    if (draw.target_scale_index < 0 ||
        draw.target_scale_index >= static_cast<int>(cfg.anchor_scale_set.size()))
        throw std::invalid_argument("data_anchor_sample: target_scale_index out of range");
    if (!(draw.jitter > 0.0)) throw std::invalid_argument("data_anchor_sample: jitter must be positive");
    if (!(draw.placement_x >= 0.0 && draw.placement_x <= 1.0 && draw.placement_y >= 0.0 &&
          draw.placement_y <= 1.0))
        throw std::invalid_argument("data_anchor_sample: placements must lie in [0, 1]");

    const Box& face = boxes[draw.face_index];
    const double s_face = std::sqrt(face.width() * face.height());
    if (!(s_face > 0.0)) throw std::invalid_argument("data_anchor_sample: chosen face is degenerate");

    const double target = cfg.anchor_scale_set[static_cast<std::size_t>(draw.target_scale_index)];
    const double f = target * draw.jitter / s_face;
    const int out = cfg.output_size;
    const long scaled_w = scaled_extent(img.width, f);
    const long scaled_h = scaled_extent(img.height, f);

    auto pick_origin = [out](double lo_f, double hi_f, long scaled, double center, double placement) {
        // Containment range for the face, intersected with the range keeping
        // the window over the image (or the image inside the window when the
        // image is the smaller of the two).
        long lo = static_cast<long>(std::ceil(hi_f)) - out;
        long hi = static_cast<long>(std::floor(lo_f));
        const long img_lo = scaled >= out ? 0 : scaled - out;
        const long img_hi = scaled >= out ? scaled - out : 0;
        lo = std::max(lo, img_lo);
        hi = std::min(hi, img_hi);
        if (lo > hi) {
            // Face wider than the window or jammed against an edge: center on
            // the face as closely as the image bounds allow.
            return std::clamp(std::lround(center - out / 2.0), img_lo, img_hi);
        }
        const long span = hi - lo + 1;
        return std::min(hi, lo + static_cast<long>(placement * static_cast<double>(span)));
    };

    const double fx1 = face.x1 * f, fx2 = face.x2 * f;
    const double fy1 = face.y1 * f, fy2 = face.y2 * f;
    const long wx = pick_origin(fx1, fx2, scaled_w, (fx1 + fx2) / 2.0, draw.placement_x);
    const long wy = pick_origin(fy1, fy2, scaled_h, (fy1 + fy2) / 2.0, draw.placement_y);

    DasResult result;
    result.factor = f;
    result.target_scale = target;
    result.image = resample_window(img, f, wx, wy, out, out);

    std::vector<Box> scaled;
    scaled.reserve(boxes.size());
    for (const Box& b : boxes) scaled.push_back({b.x1 * f, b.y1 * f, b.x2 * f, b.y2 * f});
    result.boxes = retain_for_patch(scaled, static_cast<double>(wx), static_cast<double>(wy),
                                    static_cast<double>(out), static_cast<double>(out),
                                    draw.face_index, result.face_output_index);
    return result;
}

DasResult data_anchor_sample(const ImageBuffer& img, const std::vector<Box>& boxes, Rng& rng,
                             const AugmentConfig& cfg) {
    cfg.validate();
    if (boxes.empty()) throw std::invalid_argument("data_anchor_sample: no boxes to sample from");

    DasDraw draw;
    draw.face_index = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(boxes.size()) - 1));
    const Box& face = boxes[draw.face_index];
    const double s_face = std::sqrt(face.width() * face.height());
    if (!(s_face > 0.0)) throw std::invalid_argument("data_anchor_sample: chosen face is degenerate");

    const int nearest = nearest_scale_index(cfg.anchor_scale_set, s_face);
    const int max_target = std::min(nearest + 1, static_cast<int>(cfg.anchor_scale_set.size()) - 1);
    draw.target_scale_index = static_cast<int>(rng.uniform_int(0, max_target));
    draw.jitter = rng.uniform(cfg.das_jitter_lo, cfg.das_jitter_hi);
    draw.placement_x = rng.uniform();
    draw.placement_y = rng.uniform();
    return data_anchor_sample(img, boxes, draw, cfg);
}

AugmentResult augment_pipeline(const ImageBuffer& img, const std::vector<Box>& boxes, Rng& rng,
                               const AugmentConfig& cfg) {
    cfg.validate();
    for (const Box& b : boxes)
        if (!b.valid() || b.degenerate())
            throw std::invalid_argument("augment_pipeline: input boxes must be non-degenerate");

    ImageBuffer distorted = photometric_distort(img, rng, cfg);

    AugmentResult result;
    if (!boxes.empty() && rng.bernoulli(cfg.das_probability)) {
        DasResult das = data_anchor_sample(distorted, boxes, rng, cfg);
        result.image = std::move(das.image);
        result.boxes = std::move(das.boxes);
        result.used_das = true;
        result.das_factor = das.factor;
        result.das_target_scale = das.target_scale;
        result.das_face_output_index = das.face_output_index;
        return result;
    }

    ImageWithBoxes expanded = expand(distorted, boxes, rng, cfg);
    ImageWithBoxes patch = random_crop(expanded.image, expanded.boxes, rng, cfg);
    const double scale = static_cast<double>(cfg.output_size) / patch.image.width;
    result.image = resize_bilinear(patch.image, cfg.output_size, cfg.output_size);
    result.boxes.reserve(patch.boxes.size());
    for (const Box& b : patch.boxes) {
        Box scaled{b.x1 * scale, b.y1 * scale, b.x2 * scale, b.y2 * scale};
        scaled = clip_box(scaled, cfg.output_size, cfg.output_size);
        if (!scaled.degenerate()) result.boxes.push_back(scaled);
    }
    return result;
}

}  // namespace srnkit
