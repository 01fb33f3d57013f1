#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "scdepth/camera.hpp"
#include "scdepth/grid.hpp"
#include "scdepth/tape.hpp"

namespace scdepth {

/// Minimum admissible projected depth; below it a pixel is invalid.
inline constexpr double kMinProjectedDepth = 1e-6;

/// Pose with generic scalar entries, for differentiating through the
/// rigid transform.
template <typename T>
struct PoseT {
    std::array<std::array<T, 3>, 3> R;
    Vec3T<T> t;

    Vec3T<T> apply(const Vec3T<T>& p) const {
        return {R[0][0] * p.x + R[0][1] * p.y + R[0][2] * p.z + t.x,
                R[1][0] * p.x + R[1][1] * p.y + R[1][2] * p.z + t.y,
                R[2][0] * p.x + R[2][1] * p.y + R[2][2] * p.z + t.z};
    }
};

inline PoseT<double> to_pose_t(const PoseSE3& p) {
    PoseT<double> out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.R[i][j] = p.rotation[i][j];
    out.t = p.translation;
    return out;
}

/// Warp field from a source view into a target view: per-pixel target
/// coordinates, validity mask, and the depth of each warped point in the
/// target camera frame.
template <typename T>
struct FlowFieldT {
    GridT<T> x, y;
    ScalarGrid valid;   // {0,1}; selection, never differentiated
    GridT<T> depth;
};

using FlowField = FlowFieldT<double>;

/// Pixel ray scaled by depth: depth * ((u-cx)/fx, (v-cy)/fy, 1).
template <typename T>
GridT<Vec3T<T>> backproject(const GridT<T>& depth, const CameraIntrinsics& K) {
    GridT<Vec3T<T>> pts(depth.height(), depth.width());
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            const T& d = depth(y, x);
            if (value_of(d) <= 0.0)
                throw std::domain_error("backproject: non-positive depth at pixel (" +
                                        std::to_string(x) + "," + std::to_string(y) + ")");
            T rx = (double(x) - K.cx) / K.fx;
            T ry = (double(y) - K.cy) / K.fy;
            pts(y, x) = {d * rx, d * ry, d};
        }
    }
    return pts;
}

/// Pinhole projection of a 3D point grid. Points with z <= kMinProjectedDepth
/// are marked invalid and get finite sentinel coordinates (-1, -1).
template <typename T>
FlowFieldT<T> project(const GridT<Vec3T<T>>& points, const CameraIntrinsics& K) {
    int h = points.height(), w = points.width();
    FlowFieldT<T> f{GridT<T>(h, w), GridT<T>(h, w), ScalarGrid(h, w, 0.0), GridT<T>(h, w)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec3T<T>& p = points(y, x);
            f.depth(y, x) = p.z;
            if (value_of(p.z) <= kMinProjectedDepth) {
                f.x(y, x) = T(-1.0);
                f.y(y, x) = T(-1.0);
                continue;
            }
            f.x(y, x) = K.fx * p.x / p.z + K.cx;
            f.y(y, x) = K.fy * p.y / p.z + K.cy;
            double u = value_of(f.x(y, x)), v = value_of(f.y(y, x));
            bool inb = u >= 0.0 && u <= double(K.width - 1) && v >= 0.0 && v <= double(K.height - 1);
            f.valid(y, x) = inb ? 1.0 : 0.0;
        }
    }
    return f;
}

/// Warp flow of view a into view b: project(P_ab o backproject(D_a)).
template <typename T, typename P>
FlowFieldT<T> compute_warp(const GridT<T>& depth_a, const PoseT<P>& pose_ab,
                           const CameraIntrinsics& K) {
    GridT<Vec3T<T>> pts = backproject(depth_a, K);
    for (auto& p : pts.data()) {
        Vec3T<T> q = {p.x, p.y, p.z};
        Vec3T<T> r;
        r.x = pose_ab.R[0][0] * q.x + pose_ab.R[0][1] * q.y + pose_ab.R[0][2] * q.z + pose_ab.t.x;
        r.y = pose_ab.R[1][0] * q.x + pose_ab.R[1][1] * q.y + pose_ab.R[1][2] * q.z + pose_ab.t.y;
        r.z = pose_ab.R[2][0] * q.x + pose_ab.R[2][1] * q.y + pose_ab.R[2][2] * q.z + pose_ab.t.z;
        p = r;
    }
    return project(pts, K);
}

inline FlowField compute_warp(const ScalarGrid& depth_a, const PoseSE3& pose_ab,
                              const CameraIntrinsics& K) {
    return compute_warp<double, double>(depth_a, to_pose_t(pose_ab), K);
}

/// 4-neighbor bilinear lookup. Out-of-bounds returns 0; callers exclude those
/// pixels through the validity mask.
template <typename G, typename C>
auto bilinear_at(const GridT<G>& g, const C& x, const C& y) -> decltype(g(0, 0) * x) {
    using R = decltype(g(0, 0) * x);
    double xv = value_of(x), yv = value_of(y);
    int w = g.width(), h = g.height();
    if (!(xv >= 0.0 && xv <= double(w - 1) && yv >= 0.0 && yv <= double(h - 1))) return R(0.0);
    int x0 = int(std::floor(xv)), y0 = int(std::floor(yv));
    if (x0 > w - 2) x0 = w - 2;   // x exactly W-1: shift cell, weight lands on right edge
    if (y0 > h - 2) y0 = h - 2;
    if (w == 1) x0 = 0;
    if (h == 1) y0 = 0;
    int x1 = (w == 1) ? 0 : x0 + 1, y1 = (h == 1) ? 0 : y0 + 1;
    C wx = x - double(x0);
    C wy = y - double(y0);
    R top = g(y0, x0) * (1.0 - wx) + g(y0, x1) * wx;
    R bot = g(y1, x0) * (1.0 - wx) + g(y1, x1) * wx;
    return top * (1.0 - wy) + bot * wy;
}

template <typename G, typename C>
GridT<decltype(std::declval<G>() * std::declval<C>())> bilinear_sample(
    const GridT<G>& grid, const GridT<C>& xs, const GridT<C>& ys) {
    using R = decltype(std::declval<G>() * std::declval<C>());
    GridT<R> out(xs.height(), xs.width());
    for (int y = 0; y < xs.height(); ++y)
        for (int x = 0; x < xs.width(); ++x) out(y, x) = bilinear_at(grid, xs(y, x), ys(y, x));
    return out;
}

inline ScalarGrid bilinear_sample(const ScalarGrid& grid, const FlowField& coords) {
    return bilinear_sample(grid, coords.x, coords.y);
}

}  // namespace scdepth
