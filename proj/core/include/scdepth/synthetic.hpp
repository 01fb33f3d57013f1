#pragma once

#include <optional>
#include <vector>

#include "scdepth/camera.hpp"
#include "scdepth/grid.hpp"
#include "scdepth/normals.hpp"
#include "scdepth/selfsup.hpp"

namespace scdepth {

/// Band-limited value noise evaluated in surface coordinates. Smooth enough
/// that bilinear resampling stays close to the true signal.
struct TextureConfig {
    uint64_t seed = 1;
    int octaves = 3;
    double base_frequency = 0.35;  // cycles per meter at the first octave
    double contrast = 0.5;
    double offset = 0.5;           // mid-gray
};

struct PlaneConfig {
    Vec3 point{0, 0, 5};
    Vec3 normal{0, 0, -1};
    TextureConfig texture;
};

struct BoxConfig {
    Vec3 center{0, 0, 4};            // frame-a position
    Vec3 half_extents{0.5, 0.5, 0.5};
    Vec3 displacement{0, 0, 0};      // rigid motion between frames a and b
    TextureConfig texture;
};

struct SceneConfig {
    int width = 64, height = 48;
    CameraIntrinsics intrinsics;     // default-initialized from width/height if fx==0
    std::vector<PlaneConfig> planes;
    std::optional<BoxConfig> box;
    PoseSE3 camera_motion;           // P_ab
    double noise = 0.0;              // additive intensity noise amplitude
    uint64_t seed = 0;

    /// Ground plane + back wall + laterally moving textured box.
    static SceneConfig default_dynamic(int width = 64, int height = 48, uint64_t seed = 0);
    /// Same layout without the box.
    static SceneConfig default_static(int width = 64, int height = 48, uint64_t seed = 0);
    /// Fronto-parallel back wall plus a slanted plane; exercises normals.
    static SceneConfig two_plane(int width = 64, int height = 48, uint64_t seed = 0);
};

/// Two-view training sample with exact ground truth.
struct SceneSample {
    Image image_a, image_b;
    ScalarGrid depth_a_gt, depth_b_gt;
    PoseSE3 pose_ab;
    ScalarGrid dynamic_mask_a, dynamic_mask_b;  // 1 on moving-object pixels
    ScalarGrid pseudo_depth_a, pseudo_depth_b;
    NormalGrid normals_a_gt;
    CameraIntrinsics intrinsics;
};

/// Monotone distortion a*d^g + b followed by optional box smoothing, with an
/// ordinal audit against the ground truth.
struct PseudoDepthConfig {
    double gain = 0.5;
    double exponent = 1.0;
    double offset = 0.0;
    int smoothing_radius = 0;
    double audit_tau = 0.15;   // ordinal pairs beyond this GT ratio must survive
    uint64_t seed = 0;

    void validate() const {
        if (gain <= 0.0 || exponent <= 0.0)
            throw std::invalid_argument("pseudo-depth: gain and exponent must be positive");
        if (offset < 0.0) throw std::invalid_argument("pseudo-depth: negative offset");
        if (smoothing_radius < 0) throw std::invalid_argument("pseudo-depth: negative radius");
    }
};

/// Per-pixel ray casting against the analytic scene. Throws if any ray misses
/// every surface (scenes must be fully covered).
SceneSample render_scene(const SceneConfig& cfg);
/// Render with the given pseudo-depth distortion applied to the GT depths.
SceneSample render_scene(const SceneConfig& cfg, const PseudoDepthConfig& pseudo);

ScalarGrid make_pseudo_depth(const ScalarGrid& gt_depth, const PseudoDepthConfig& cfg);

/// Texture lookup, exposed for tests.
double eval_texture(const TextureConfig& tex, double u, double v, int channel);

}  // namespace scdepth
