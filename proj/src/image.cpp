#include "srnkit/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace srnkit {

namespace {

[[noreturn]] void ppm_fail(const std::string& name, const std::string& what) {
    throw std::runtime_error(name + ": " + what);
}

// PPM header tokens are separated by whitespace; '#' starts a comment that
// runs to end of line.
int read_header_int(std::istream& in, const std::string& name) {
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
        } else if (!std::isspace(c)) {
            break;
        }
    }
    if (c == EOF) ppm_fail(name, "truncated PPM header");
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) ppm_fail(name, "malformed PPM header");
    if (c != EOF) in.unget();
    return value;
}

}  // namespace

ImageBuffer read_ppm(std::istream& in, const std::string& name) {
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '6') ppm_fail(name, "not a binary PPM (P6)");
    const int width = read_header_int(in, name);
    const int height = read_header_int(in, name);
    const int maxval = read_header_int(in, name);
    if (width < 1 || height < 1) ppm_fail(name, "non-positive dimensions");
    if (maxval != 255) ppm_fail(name, "unsupported maxval (only 255)");
    in.get();  // single whitespace byte before the raster
    ImageBuffer img(width, height);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        ppm_fail(name, "truncated pixel data");
    return img;
}

ImageBuffer read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    return read_ppm(in, path);
}

void write_ppm(const ImageBuffer& img, std::ostream& out) {
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
}

void write_ppm(const ImageBuffer& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    write_ppm(img, out);
    if (!out) throw std::runtime_error(path + ": write failed");
}

namespace {

struct TapTable {
    std::vector<int> lo, hi;
    std::vector<float> w;  // weight of hi tap
};

// Half-pixel mapping src = (dst + 0.5) / scale - 0.5, taps clamped to the
// source extent.
TapTable make_taps(int out_extent, double scale, double offset, int src_extent) {
    TapTable t;
    t.lo.resize(out_extent);
    t.hi.resize(out_extent);
    t.w.resize(out_extent);
    for (int i = 0; i < out_extent; ++i) {
        const double src = (offset + i + 0.5) / scale - 0.5;
        const double f = std::floor(src);
        int lo = static_cast<int>(f);
        int hi = lo + 1;
        float w = static_cast<float>(src - f);
        lo = std::clamp(lo, 0, src_extent - 1);
        hi = std::clamp(hi, 0, src_extent - 1);
        t.lo[i] = lo;
        t.hi[i] = hi;
        t.w[i] = w;
    }
    return t;
}

}  // namespace

ImageBuffer resize_bilinear(const ImageBuffer& src, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1)
        throw std::invalid_argument("resize_bilinear: output dimensions must be positive");
    ImageBuffer dst(out_width, out_height);
    const TapTable tx = make_taps(out_width, static_cast<double>(out_width) / src.width, 0.0, src.width);
    const TapTable ty =
        make_taps(out_height, static_cast<double>(out_height) / src.height, 0.0, src.height);
    for (int y = 0; y < out_height; ++y) {
        const std::uint8_t* row_lo = &src.data[static_cast<std::size_t>(ty.lo[y]) * src.width * 3];
        const std::uint8_t* row_hi = &src.data[static_cast<std::size_t>(ty.hi[y]) * src.width * 3];
        const float wy = ty.w[y];
        std::uint8_t* out_row = &dst.data[static_cast<std::size_t>(y) * out_width * 3];
        for (int x = 0; x < out_width; ++x) {
            const int xl = tx.lo[x] * 3;
            const int xh = tx.hi[x] * 3;
            const float wx = tx.w[x];
            for (int c = 0; c < 3; ++c) {
                const float top = row_lo[xl + c] + wx * (row_lo[xh + c] - row_lo[xl + c]);
                const float bot = row_hi[xl + c] + wx * (row_hi[xh + c] - row_hi[xl + c]);
                out_row[x * 3 + c] = static_cast<std::uint8_t>(std::lround(top + wy * (bot - top)));
            }
        }
    }
    return dst;
}

ImageBuffer resample_window(const ImageBuffer& src, double factor, long window_x, long window_y,
                            int out_width, int out_height) {
    if (factor <= 0.0) throw std::invalid_argument("resample_window: factor must be positive");
    ImageBuffer dst(out_width, out_height);
    const long scaled_w = std::max(1L, std::lround(src.width * factor));
    const long scaled_h = std::max(1L, std::lround(src.height * factor));

    // Only the part of the window that overlaps the scaled image carries
    // pixels; everything else stays zero.
    const int x0 = static_cast<int>(std::clamp(-window_x, 0L, static_cast<long>(out_width)));
    const int x1 = static_cast<int>(std::clamp(scaled_w - window_x, 0L, static_cast<long>(out_width)));
    const int y0 = static_cast<int>(std::clamp(-window_y, 0L, static_cast<long>(out_height)));
    const int y1 =
        static_cast<int>(std::clamp(scaled_h - window_y, 0L, static_cast<long>(out_height)));
    if (x0 >= x1 || y0 >= y1) return dst;

    const TapTable tx = make_taps(x1 - x0, factor, static_cast<double>(window_x + x0), src.width);
    const TapTable ty = make_taps(y1 - y0, factor, static_cast<double>(window_y + y0), src.height);
    for (int y = y0; y < y1; ++y) {
        const std::uint8_t* row_lo =
            &src.data[static_cast<std::size_t>(ty.lo[y - y0]) * src.width * 3];
        const std::uint8_t* row_hi =
            &src.data[static_cast<std::size_t>(ty.hi[y - y0]) * src.width * 3];
        const float wy = ty.w[y - y0];
        std::uint8_t* out_row = &dst.data[static_cast<std::size_t>(y) * out_width * 3];
        for (int x = x0; x < x1; ++x) {
            const int xl = tx.lo[x - x0] * 3;
            const int xh = tx.hi[x - x0] * 3;
            const float wx = tx.w[x - x0];
            for (int c = 0; c < 3; ++c) {
                const float top = row_lo[xl + c] + wx * (row_lo[xh + c] - row_lo[xl + c]);
                const float bot = row_hi[xl + c] + wx * (row_hi[xh + c] - row_hi[xl + c]);
                out_row[x * 3 + c] = static_cast<std::uint8_t>(std::lround(top + wy * (bot - top)));
            }
        }
    }
    return dst;
}

ImageBuffer crop(const ImageBuffer& src, long x, long y, int out_width, int out_height) {
    ImageBuffer dst(out_width, out_height);
    const long sx0 = std::max(0L, x);
    const long sy0 = std::max(0L, y);
    const long sx1 = std::min(static_cast<long>(src.width), x + out_width);
    const long sy1 = std::min(static_cast<long>(src.height), y + out_height);
    for (long sy = sy0; sy < sy1; ++sy) {
        const long dy = sy - y;
        if (sx1 <= sx0) break;
        const std::uint8_t* src_row = &src.data[(static_cast<std::size_t>(sy) * src.width + sx0) * 3];
        std::uint8_t* dst_row = &dst.data[(static_cast<std::size_t>(dy) * out_width + (sx0 - x)) * 3];
        std::copy(src_row, src_row + (sx1 - sx0) * 3, dst_row);
    }
    return dst;
}

}  // namespace srnkit
