#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "scdepth/camera.hpp"
#include "scdepth/grid.hpp"
#include "scdepth/ranking.hpp"
#include "scdepth/rng.hpp"
#include "scdepth/tape.hpp"
#include "scdepth/warp.hpp"

namespace scdepth {

template <typename T>
struct NormalGridT {
    GridT<Vec3T<T>> n;          // unit normals, oriented toward the camera
    ScalarGrid degenerate;      // 1 where tangents collapsed and the viewing
                                // direction was substituted
};

using NormalGrid = NormalGridT<double>;

/// Surface normals from a depth map: backproject to 3D, cross the
/// central-difference tangents, normalize, orient toward the camera
/// (n . p < 0). Boundary pixels use one-sided differences.
template <typename T>
NormalGridT<T> normals_from_depth(const GridT<T>& depth, const CameraIntrinsics& K) {
    int h = depth.height(), w = depth.width();
    if (h < 2 || w < 2) throw std::invalid_argument("normals_from_depth: grid too small");
    GridT<Vec3T<T>> pts = backproject(depth, K);
    NormalGridT<T> out{GridT<Vec3T<T>>(h, w), ScalarGrid(h, w, 0.0)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int xl = std::max(0, x - 1), xr = std::min(w - 1, x + 1);
            int yu = std::max(0, y - 1), yd = std::min(h - 1, y + 1);
            Vec3T<T> tx = pts(y, xr) - pts(y, xl);
            Vec3T<T> ty = pts(yd, x) - pts(yu, x);
            Vec3T<T> c = tx.cross(ty);
            using scdepth::sqrt;
            using std::sqrt;
            T norm_sq = c.dot(c);
            const Vec3T<T>& p = pts(y, x);
            if (value_of(norm_sq) <= 0.0) {
                // degenerate tangents: fall back to the negated viewing direction
                T plen = sqrt(p.dot(p));
                out.n(y, x) = {T(0.0) - p.x / plen, T(0.0) - p.y / plen, T(0.0) - p.z / plen};
                out.degenerate(y, x) = 1.0;
                continue;
            }
            T inv = 1.0 / sqrt(norm_sq);
            Vec3T<T> n = {c.x * inv, c.y * inv, c.z * inv};
            if (value_of(n.dot(p)) > 0.0) n = {T(0.0) - n.x, T(0.0) - n.y, T(0.0) - n.z};
            out.n(y, x) = n;
        }
    }
    return out;
}

/// Mean 3-component L1 distance between predicted and pseudo-depth normals.
template <typename T, typename U>
auto normal_matching_loss(const NormalGridT<T>& n, const NormalGridT<U>& n_star)
    -> decltype(std::declval<T>() + std::declval<U>()) {
    using R = decltype(std::declval<T>() + std::declval<U>());
    if (n.n.height() != n_star.n.height() || n.n.width() != n_star.n.width())
        throw std::invalid_argument("normal_matching_loss: shape mismatch");
    R sum(0.0);
    using scdepth::abs;
    using std::abs;
    for (size_t i = 0; i < n.n.size(); ++i) {
        sum = sum + abs(n.n[i].x - n_star.n[i].x) + abs(n.n[i].y - n_star.n[i].y) +
              abs(n.n[i].z - n_star.n[i].z);
    }
    return sum / double(n.n.size());
}

struct EdgeSamplingConfig {
    double edge_percentile = 90.0;  // gradient-magnitude percentile defining edges
    double offset_min = 2.0;        // pixel offsets along the gradient direction
    double offset_max = 5.0;
    int n_pairs = 0;
    uint64_t seed = 0;
};

struct EdgeSamplingResult {
    PointPairSet pairs;
    bool empty_warning = false;  // constant image: no edges
};

/// Pairs straddling image edges: Sobel gradient on the grayscale image, edge
/// set = top percentile by magnitude, pairs at +-offset along the local
/// gradient direction.
inline EdgeSamplingResult edge_guided_sampling(const Image& image,
                                               const EdgeSamplingConfig& cfg) {
    if (cfg.n_pairs < 0) throw std::invalid_argument("edge_guided_sampling: negative pair count");
    int h = image[0].height(), w = image[0].width();
    ScalarGrid gray(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            gray(y, x) = (image[0](y, x) + image[1](y, x) + image[2](y, x)) / 3.0;

    ScalarGrid gx(h, w, 0.0), gy(h, w, 0.0), mag(h, w, 0.0);
    for (int y = 1; y + 1 < h; ++y) {
        for (int x = 1; x + 1 < w; ++x) {
            double sx = (gray(y - 1, x + 1) + 2 * gray(y, x + 1) + gray(y + 1, x + 1)) -
                        (gray(y - 1, x - 1) + 2 * gray(y, x - 1) + gray(y + 1, x - 1));
            double sy = (gray(y + 1, x - 1) + 2 * gray(y + 1, x) + gray(y + 1, x + 1)) -
                        (gray(y - 1, x - 1) + 2 * gray(y - 1, x) + gray(y - 1, x + 1));
            gx(y, x) = sx;
            gy(y, x) = sy;
            mag(y, x) = std::sqrt(sx * sx + sy * sy);
        }
    }

    std::vector<double> mags(mag.data());
    size_t k = size_t(double(mags.size()) * cfg.edge_percentile / 100.0);
    k = std::min(k, mags.size() - 1);
    std::nth_element(mags.begin(), mags.begin() + k, mags.end());
    double threshold = mags[k];

    std::vector<uint32_t> edges;
    for (size_t i = 0; i < mag.size(); ++i)
        if (mag[i] >= threshold && mag[i] > 0.0) edges.push_back(uint32_t(i));

    EdgeSamplingResult out;
    out.pairs.provenance = PairProvenance::edge_guided;
    if (edges.empty()) {
        out.empty_warning = true;
        return out;
    }

    Rng rng(cfg.seed);
    int attempts = 0, max_attempts = cfg.n_pairs * 16 + 16;
    while (int(out.pairs.size()) < cfg.n_pairs && attempts++ < max_attempts) {
        uint32_t e = edges[rng.uniform(edges.size())];
        int ex = int(e % w), ey = int(e / w);
        double m = mag(ey, ex);
        double dx = gx(ey, ex) / m, dy = gy(ey, ex) / m;
        double off = rng.uniform(cfg.offset_min, cfg.offset_max);
        int x0 = int(std::lround(ex + off * dx)), y0 = int(std::lround(ey + off * dy));
        int x1 = int(std::lround(ex - off * dx)), y1 = int(std::lround(ey - off * dy));
        if (x0 < 0 || x0 >= w || y0 < 0 || y0 >= h) continue;
        if (x1 < 0 || x1 >= w || y1 < 0 || y1 >= h) continue;
        out.pairs.pairs.emplace_back(uint32_t(y0) * w + x0, uint32_t(y1) * w + x1);
    }
    return out;
}

/// Edge-aware relative normal loss: mean |n_A.n_B - n*_A.n*_B| over pairs.
template <typename T, typename U>
auto ern_loss(const NormalGridT<T>& n, const NormalGridT<U>& n_star, const PointPairSet& pairs)
    -> decltype(std::declval<T>() + std::declval<U>()) {
    using R = decltype(std::declval<T>() + std::declval<U>());
    if (pairs.pairs.empty()) return R(0.0);
    R sum(0.0);
    using scdepth::abs;
    using std::abs;
    for (const auto& [a, b] : pairs.pairs) {
        T dot_pred = n.n[a].dot(n.n[b]);
        U dot_pseudo = n_star.n[a].dot(n_star.n[b]);
        sum = sum + abs(dot_pred - dot_pseudo);
    }
    return sum / double(pairs.size());
}

}  // namespace scdepth
