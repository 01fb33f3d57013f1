#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "scdepth/camera.hpp"
#include "scdepth/grid.hpp"
#include "scdepth/loss_report.hpp"
#include "scdepth/tape.hpp"
#include "scdepth/warp.hpp"

namespace scdepth {

template <typename T>
using ImageT = std::array<GridT<T>, 3>;

struct PhotometricConfig {
    double lambda = 0.15;       // L1 weight; (1-lambda) goes to the SSIM term
    double ssim_c1 = 0.01 * 0.01;
    double ssim_c2 = 0.03 * 0.03;
    int window = 3;

    void validate() const {
        if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("photometric: lambda outside [0,1]");
        if (ssim_c1 <= 0.0 || ssim_c2 <= 0.0) throw std::invalid_argument("photometric: SSIM constants must be positive");
        if (window < 3 || window % 2 == 0) throw std::invalid_argument("photometric: window must be odd and >= 3");
    }
};

struct SelfSupWeights {
    double alpha = 1.0, beta = 0.5, gamma = 0.1;

    void validate() const {
        if (alpha < 0 || beta < 0 || gamma < 0)
            throw std::invalid_argument("selfsup weights must be nonnegative");
    }
};

namespace detail {
template <typename TA, typename TB>
using Mixed = decltype(std::declval<TA>() * std::declval<TB>());
}

/// Per-pixel SSIM with box-filter local statistics. Windows are truncated at
/// image borders and normalized by the actual pixel count.
template <typename TA, typename TB>
GridT<detail::Mixed<TA, TB>> ssim_map(const GridT<TA>& x, const GridT<TB>& y,
                                      const PhotometricConfig& cfg) {
    using R = detail::Mixed<TA, TB>;
    if (!(x.height() == y.height() && x.width() == y.width()))
        throw std::invalid_argument("ssim_map: shape mismatch");
    cfg.validate();
    int h = x.height(), w = x.width(), r = cfg.window / 2;
    GridT<R> out(h, w);
    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            int y0 = std::max(0, py - r), y1 = std::min(h - 1, py + r);
            int x0 = std::max(0, px - r), x1 = std::min(w - 1, px + r);
            double n = double((y1 - y0 + 1) * (x1 - x0 + 1));
            R sx(0.0), sy(0.0), sxx(0.0), syy(0.0), sxy(0.0);
            for (int yy = y0; yy <= y1; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) {
                    const TA& a = x(yy, xx);
                    const TB& b = y(yy, xx);
                    sx = sx + a;
                    sy = sy + b;
                    sxx = sxx + a * a;
                    syy = syy + b * b;
                    sxy = sxy + a * b;
                }
            }
            R mx = sx / n, my = sy / n;
            R vx = sxx / n - mx * mx;
            R vy = syy / n - my * my;
            R cxy = sxy / n - mx * my;
            R num = (2.0 * mx * my + cfg.ssim_c1) * (2.0 * cxy + cfg.ssim_c2);
            R den = (mx * mx + my * my + cfg.ssim_c1) * (vx + vy + cfg.ssim_c2);
            out(py, px) = num / den;
        }
    }
    return out;
}

template <typename T>
struct PhotometricResult {
    T scalar;
    GridT<T> per_pixel;
};

/// Eq-style mixed photometric error: lambda*L1 + (1-lambda)*(1-SSIM)/2,
/// channel-averaged, reduced as a mean over the valid set.
template <typename TA, typename TB>
PhotometricResult<detail::Mixed<TA, TB>> photometric_loss(const ImageT<TA>& image_a,
                                                          const ImageT<TB>& synthesized,
                                                          const ScalarGrid& valid,
                                                          const PhotometricConfig& cfg) {
    using R = detail::Mixed<TA, TB>;
    cfg.validate();
    int h = image_a[0].height(), w = image_a[0].width();
    for (int c = 0; c < 3; ++c)
        if (synthesized[c].height() != h || synthesized[c].width() != w)
            throw std::invalid_argument("photometric_loss: shape mismatch");
    GridT<R> per_pixel(h, w, R(0.0));
    for (int c = 0; c < 3; ++c) {
        GridT<R> s = ssim_map(image_a[c], synthesized[c], cfg);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                using scdepth::abs;
                using std::abs;
                R l1 = abs(image_a[c](y, x) - synthesized[c](y, x));
                R dssim = (1.0 - s(y, x)) * 0.5;
                per_pixel(y, x) = per_pixel(y, x) +
                                  (cfg.lambda * l1 + (1.0 - cfg.lambda) * dssim) * (1.0 / 3.0);
            }
        }
    }
    R sum(0.0);
    double count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (valid(y, x) != 0.0) {
                sum = sum + per_pixel(y, x);
                count += 1;
            }
    if (count == 0) throw std::domain_error("photometric_loss: empty valid set");
    return {sum / count, std::move(per_pixel)};
}

template <typename T>
struct DepthInconsistency {
    GridT<T> diff;     // |d_comp - d_interp| / (d_comp + d_interp), 0 where invalid
    ScalarGrid valid;  // warp validity mask
};

/// Inconsistency over an existing warp field. `valid` marks the pixels the
/// reduction will touch; pixels whose interpolated depth collapses to zero
/// get the saturating value 1.
template <typename T>
GridT<T> depth_inconsistency_from_flow(const FlowFieldT<T>& flow, const GridT<T>& depth_b,
                                       const ScalarGrid& valid) {
    int h = flow.depth.height(), w = flow.depth.width();
    GridT<T> diff(h, w, T(0.0));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (valid(y, x) == 0.0) continue;
            T d_comp = flow.depth(y, x);
            T d_interp = bilinear_at(depth_b, flow.x(y, x), flow.y(y, x));
            if (value_of(d_interp) <= 0.0 || value_of(d_comp) <= 0.0) {
                diff(y, x) = T(1.0);
                continue;
            }
            using scdepth::abs;
            using std::abs;
            diff(y, x) = abs(d_comp - d_interp) / (d_comp + d_interp);
        }
    }
    return diff;
}

/// Normalized symmetric depth inconsistency between D_a (warped into view b)
/// and D_b (interpolated at the warp targets).
template <typename T, typename P>
DepthInconsistency<T> depth_inconsistency(const GridT<T>& depth_a, const GridT<T>& depth_b,
                                          const PoseT<P>& pose_ab, const CameraIntrinsics& K) {
    FlowFieldT<T> flow = compute_warp(depth_a, pose_ab, K);
    int h = depth_a.height(), w = depth_a.width();
    DepthInconsistency<T> out{GridT<T>(h, w, T(0.0)), flow.valid};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (out.valid(y, x) == 0.0) continue;
            T d_interp = bilinear_at(depth_b, flow.x(y, x), flow.y(y, x));
            if (value_of(d_interp) <= 0.0) {
                out.valid(y, x) = 0.0;
                continue;
            }
            using scdepth::abs;
            using std::abs;
            out.diff(y, x) = abs(flow.depth(y, x) - d_interp) / (flow.depth(y, x) + d_interp);
        }
    }
    return out;
}

inline DepthInconsistency<double> depth_inconsistency(const ScalarGrid& depth_a,
                                                      const ScalarGrid& depth_b,
                                                      const PoseSE3& pose_ab,
                                                      const CameraIntrinsics& K) {
    return depth_inconsistency<double, double>(depth_a, depth_b, to_pose_t(pose_ab), K);
}

/// Self-discovered mask M_s = 1 - D_diff; down-weights geometrically
/// inconsistent regions (dynamics, occlusions).
template <typename T>
GridT<T> self_mask(const GridT<T>& d_diff) {
    GridT<T> m(d_diff.height(), d_diff.width());
    for (size_t i = 0; i < d_diff.size(); ++i) m[i] = 1.0 - d_diff[i];
    return m;
}

/// Mean of D_diff over the valid set.
template <typename T>
T geometry_loss(const GridT<T>& d_diff, const ScalarGrid& valid) {
    T sum(0.0);
    double count = 0;
    for (size_t i = 0; i < d_diff.size(); ++i)
        if (valid[i] != 0.0) {
            sum = sum + d_diff[i];
            count += 1;
        }
    if (count == 0) throw std::domain_error("geometry_loss: empty valid set");
    return sum / count;
}

/// Mean over the valid set of M_s(p) * L_P(p). With a plain-valued mask no
/// gradient flows through it; passing a tracked mask differentiates Eq-3
/// through M_s as well.
template <typename T, typename M>
T weighted_photometric(const GridT<T>& per_pixel_lp, const GridT<M>& mask,
                       const ScalarGrid& valid) {
    T sum(0.0);
    double count = 0;
    for (size_t i = 0; i < per_pixel_lp.size(); ++i)
        if (valid[i] != 0.0) {
            sum = sum + mask[i] * per_pixel_lp[i];
            count += 1;
        }
    if (count == 0) throw std::domain_error("weighted_photometric: empty valid set");
    return sum / count;
}

/// Edge-aware smoothness, sum over pixels and directions of
/// (exp(-|grad I|) * grad D)^2 with forward differences.
template <typename T>
T smoothness_loss(const GridT<T>& depth, const ImageT<double>& image) {
    int h = depth.height(), w = depth.width();
    T sum(0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x + 1 < w) {
                double gi = (std::abs(image[0](y, x + 1) - image[0](y, x)) +
                             std::abs(image[1](y, x + 1) - image[1](y, x)) +
                             std::abs(image[2](y, x + 1) - image[2](y, x))) / 3.0;
                T gd = depth(y, x + 1) - depth(y, x);
                T term = std::exp(-gi) * gd;
                sum = sum + term * term;
            }
            if (y + 1 < h) {
                double gi = (std::abs(image[0](y + 1, x) - image[0](y, x)) +
                             std::abs(image[1](y + 1, x) - image[1](y, x)) +
                             std::abs(image[2](y + 1, x) - image[2](y, x))) / 3.0;
                T gd = depth(y + 1, x) - depth(y, x);
                T term = std::exp(-gi) * gd;
                sum = sum + term * term;
            }
        }
    }
    return sum;
}

template <typename T>
struct MinReprojection {
    GridT<T> per_pixel;   // min over sources of L_P(p)
    ScalarGrid automask;  // 1 iff warped min is strictly below identity min
};

/// Per-pixel minimum reprojection over warped sources plus auto-masking
/// against the raw (unwarped) sources.
template <typename T>
MinReprojection<T> min_reprojection_automask(const ImageT<double>& image_a,
                                             const std::vector<GridT<T>>& warped_lp_maps,
                                             const std::vector<ImageT<double>>& raw_sources,
                                             const PhotometricConfig& cfg) {
    if (warped_lp_maps.empty()) throw std::invalid_argument("min_reprojection: no sources");
    int h = image_a[0].height(), w = image_a[0].width();
    ScalarGrid all_valid(h, w, 1.0);
    std::vector<ScalarGrid> identity_maps;
    identity_maps.reserve(raw_sources.size());
    for (const auto& src : raw_sources)
        identity_maps.push_back(photometric_loss(image_a, src, all_valid, cfg).per_pixel);

    MinReprojection<T> out{GridT<T>(h, w), ScalarGrid(h, w, 0.0)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            T best = warped_lp_maps[0](y, x);
            for (size_t s = 1; s < warped_lp_maps.size(); ++s) {
                using scdepth::min;
                using std::min;
                best = min(best, warped_lp_maps[s](y, x));
            }
            out.per_pixel(y, x) = best;
            double ident = std::numeric_limits<double>::infinity();
            for (const auto& m : identity_maps) ident = std::min(ident, m(y, x));
            out.automask(y, x) = value_of(best) < ident ? 1.0 : 0.0;
        }
    }
    return out;
}

}  // namespace scdepth
