// geometry.hpp - points, rectangles and the pixel grid discretizing all
// area integrals.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace relaysim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(const Point& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

// Regular pixel grid over a rectangle; pixels are addressed by a flat index
// and represented by their center point. All spatial integrals in the model
// are sums of (value at center) * pixel_area.
class PixelGrid {
public:
    PixelGrid() = default;
    PixelGrid(Rect extent, double pixel_size) : extent_(extent), pixel_(pixel_size) {
        if (pixel_size <= 0.0) throw std::invalid_argument("pixel size must be > 0");
        nx_ = static_cast<int>(std::llround(extent.width() / pixel_size));
        ny_ = static_cast<int>(std::llround(extent.height() / pixel_size));
        if (nx_ < 1 || ny_ < 1) throw std::invalid_argument("grid extent smaller than one pixel");
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
    double pixel_size() const { return pixel_; }
    double pixel_area() const { return pixel_ * pixel_; }
    double total_area() const { return size() * pixel_area(); }
    const Rect& extent() const { return extent_; }

    Point center(std::size_t idx) const {
        const int iy = static_cast<int>(idx) / nx_;
        const int ix = static_cast<int>(idx) % nx_;
        return {extent_.x0 + (ix + 0.5) * pixel_, extent_.y0 + (iy + 0.5) * pixel_};
    }

    // flat index of the pixel containing p (clamped to the grid)
    std::size_t index_of(const Point& p) const {
        int ix = static_cast<int>(std::floor((p.x - extent_.x0) / pixel_));
        int iy = static_cast<int>(std::floor((p.y - extent_.y0) / pixel_));
        ix = std::max(0, std::min(nx_ - 1, ix));
        iy = std::max(0, std::min(ny_ - 1, iy));
        return static_cast<std::size_t>(iy) * nx_ + ix;
    }

private:
    Rect extent_;
    double pixel_ = 0.0;
    int nx_ = 0, ny_ = 0;
};

}  // namespace relaysim
