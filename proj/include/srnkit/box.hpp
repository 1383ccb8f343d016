#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srnkit {

// Axis-aligned rectangle in continuous pixel coordinates, (x1,y1) top-left,
// (x2,y2) bottom-right. Area is (x2-x1)*(y2-y1); no "+1" pixel widths.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x1 + x2); }
    double center_y() const { return 0.5 * (y1 + y2); }

    bool valid() const { return x1 <= x2 && y1 <= y2; }
    bool degenerate() const { return area() <= 0.0; }

    static Box from_center(double cx, double cy, double w, double h) {
        return Box{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
    }
    static Box from_xywh(double x, double y, double w, double h) {
        return Box{x, y, x + w, y + h};
    }
};

inline double intersection_area(const Box& a, const Box& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

// Intersection over union. Throws when both boxes have zero area: a 0/0
// overlap almost always means corrupted input, not "no overlap".
inline double iou(const Box& a, const Box& b) {
    if (!a.valid() || !b.valid())
        throw std::invalid_argument("iou: box with x2 < x1 or y2 < y1");
    const double area_a = a.area();
    const double area_b = b.area();
    const double inter = intersection_area(a, b);
    const double uni = area_a + area_b - inter;
    if (uni <= 0.0)
        throw std::invalid_argument("iou: both boxes have zero area, IoU undefined");
    return inter / uni;
}

// Clamps all four coordinates into [0,width] x [0,height]. May yield a
// zero-area box; never flips corners.
inline Box clip_box(const Box& b, double width, double height) {
    if (width <= 0.0 || height <= 0.0)
        throw std::invalid_argument("clip_box: frame dimensions must be positive");
    return Box{std::clamp(b.x1, 0.0, width), std::clamp(b.y1, 0.0, height),
               std::clamp(b.x2, 0.0, width), std::clamp(b.y2, 0.0, height)};
}

}  // namespace srnkit
