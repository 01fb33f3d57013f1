#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace scdepth {

/// Row-major H x W grid of values. The workhorse container for image
/// channels, depth maps, masks, and per-pixel loss maps.
template <typename T>
class GridT {
public:
    GridT() = default;
    GridT(int height, int width) : h_(height), w_(width), v_(size_t(height) * width) {
        if (height <= 0 || width <= 0)
            throw std::invalid_argument("GridT: non-positive dimensions");
    }
    GridT(int height, int width, T fill)
        : h_(height), w_(width), v_(size_t(height) * width, fill) {
        if (height <= 0 || width <= 0)
            throw std::invalid_argument("GridT: non-positive dimensions");
    }

    int height() const { return h_; }
    int width() const { return w_; }
    size_t size() const { return v_.size(); }

    T& operator()(int y, int x) { return v_[size_t(y) * w_ + x]; }
    const T& operator()(int y, int x) const { return v_[size_t(y) * w_ + x]; }
    T& operator[](size_t i) { return v_[i]; }
    const T& operator[](size_t i) const { return v_[i]; }

    bool in_bounds(int y, int x) const { return y >= 0 && y < h_ && x >= 0 && x < w_; }
    bool same_shape(const GridT& o) const { return h_ == o.h_ && w_ == o.w_; }

    std::vector<T>& data() { return v_; }
    const std::vector<T>& data() const { return v_; }

    void fill(T value) { v_.assign(v_.size(), value); }

private:
    int h_ = 0, w_ = 0;
    std::vector<T> v_;
};

using ScalarGrid = GridT<double>;

/// Three-channel image; each channel a ScalarGrid in [0,1].
using Image = std::array<ScalarGrid, 3>;

inline void require_same_shape(const ScalarGrid& a, const ScalarGrid& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch " +
                                    std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                    " vs " + std::to_string(b.height()) + "x" +
                                    std::to_string(b.width()));
}

inline bool all_finite(const ScalarGrid& g) {
    for (double v : g.data())
        if (!std::isfinite(v)) return false;
    return true;
}

inline Image make_image(int h, int w, double fill = 0.0) {
    return Image{ScalarGrid(h, w, fill), ScalarGrid(h, w, fill), ScalarGrid(h, w, fill)};
}

}  // namespace scdepth
