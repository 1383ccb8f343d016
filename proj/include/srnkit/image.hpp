#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace srnkit {

// Interleaved 8-bit RGB, row-major.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // size = width * height * 3

    ImageBuffer() = default;
    ImageBuffer(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
};

// Binary PPM (P6), maxval 255 only.
ImageBuffer read_ppm(const std::string& path);
ImageBuffer read_ppm(std::istream& in, const std::string& name = "<stream>");
void write_ppm(const ImageBuffer& img, const std::string& path);
void write_ppm(const ImageBuffer& img, std::ostream& out);

// Bilinear resample to out_width x out_height, half-pixel center mapping,
// edge-clamped.
ImageBuffer resize_bilinear(const ImageBuffer& src, int out_width, int out_height);

// Samples the window [window_x, window_x+out_width) x [window_y, ...) of
// src scaled by `factor`, as if the whole image had been bilinearly scaled
// first and then cropped. Pixels outside the scaled image are zero.
ImageBuffer resample_window(const ImageBuffer& src, double factor, long window_x, long window_y,
                            int out_width, int out_height);

// Crop with zero padding where the window leaves the image.
ImageBuffer crop(const ImageBuffer& src, long x, long y, int out_width, int out_height);

}  // namespace srnkit
