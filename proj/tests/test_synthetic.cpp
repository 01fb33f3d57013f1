#include <doctest.h>

#include <cmath>

#include "scdepth/synthetic.hpp"

using namespace scdepth;

namespace {

SceneConfig single_plane_scene() {
    SceneConfig c;
    c.width = 32;
    c.height = 24;
    c.planes.push_back(PlaneConfig{});  // fronto-parallel wall at z = 5
    c.camera_motion = PoseSE3{};        // identity
    return c;
}

}  // namespace

TEST_CASE("render: fronto-parallel wall under the identity pose") {
    auto s = render_scene(single_plane_scene());
    for (double d : s.depth_a_gt.data()) CHECK(d == doctest::Approx(5.0).epsilon(1e-12));
    // same camera, same scene, no noise: the two views are pixel-identical
    for (int c = 0; c < 3; ++c)
        for (size_t i = 0; i < s.image_a[c].size(); ++i)
            CHECK(s.image_a[c][i] == s.image_b[c][i]);
    for (double m : s.dynamic_mask_a.data()) CHECK(m == 0.0);
}

TEST_CASE("render: ground-truth warp reconstructs the static view photometrically") {
    auto s = render_scene(SceneConfig::default_static(64, 48, 3));
    auto flow = compute_warp(s.depth_a_gt, s.pose_ab, s.intrinsics);
    Image synth = make_image(48, 64);
    for (int c = 0; c < 3; ++c) synth[c] = bilinear_sample(s.image_b[c], flow.x, flow.y);
    auto res = photometric_loss(s.image_a, synth, flow.valid, PhotometricConfig{});
    // bilinear resampling error plus occlusion fringes at depth discontinuities
    CHECK(res.scalar < 0.05);
}

TEST_CASE("render: the moving box violates photo-consistency where the mask says so") {
    auto s = render_scene(SceneConfig::default_dynamic(64, 48, 5));
    double dyn_pixels = 0;
    for (double m : s.dynamic_mask_a.data()) dyn_pixels += m;
    REQUIRE(dyn_pixels > 20);  // the box actually covers part of the frame

    auto flow = compute_warp(s.depth_a_gt, s.pose_ab, s.intrinsics);
    Image synth = make_image(48, 64);
    for (int c = 0; c < 3; ++c) synth[c] = bilinear_sample(s.image_b[c], flow.x, flow.y);
    auto res = photometric_loss(s.image_a, synth, flow.valid, PhotometricConfig{});
    double dyn_sum = 0, dyn_n = 0, sta_sum = 0, sta_n = 0;
    for (size_t i = 0; i < res.per_pixel.size(); ++i) {
        if (flow.valid[i] == 0.0) continue;
        if (s.dynamic_mask_a[i] > 0.5) {
            dyn_sum += res.per_pixel[i];
            ++dyn_n;
        } else {
            sta_sum += res.per_pixel[i];
            ++sta_n;
        }
    }
    REQUIRE(dyn_n > 0);
    REQUIRE(sta_n > 0);
    // the rigid-scene warp cannot explain the box motion
    CHECK(dyn_sum / dyn_n > 5.0 * (sta_sum / sta_n));
}

TEST_CASE("render: depth inconsistency is tiny on static scenes, concentrated on dynamics") {
    auto stat = render_scene(SceneConfig::default_static(64, 48, 7));
    auto ds = depth_inconsistency(stat.depth_a_gt, stat.depth_b_gt, stat.pose_ab,
                                  stat.intrinsics);
    double sum = 0, n = 0;
    for (size_t i = 0; i < ds.diff.size(); ++i)
        if (ds.valid[i] != 0.0) {
            sum += ds.diff[i];
            ++n;
        }
    REQUIRE(n > 0);
    CHECK(sum / n < 1e-3);

    auto dyn = render_scene(SceneConfig::default_dynamic(64, 48, 7));
    auto dd = depth_inconsistency(dyn.depth_a_gt, dyn.depth_b_gt, dyn.pose_ab, dyn.intrinsics);
    double dyn_sum = 0, dyn_n = 0, sta_sum = 0, sta_n = 0;
    for (size_t i = 0; i < dd.diff.size(); ++i) {
        if (dd.valid[i] == 0.0) continue;
        if (dyn.dynamic_mask_a[i] > 0.5) {
            dyn_sum += dd.diff[i];
            ++dyn_n;
        } else {
            sta_sum += dd.diff[i];
            ++sta_n;
        }
    }
    REQUIRE(dyn_n > 0);
    // static pixels near the box pick up occlusion fringes, so the contrast is
    // a factor, not orders of magnitude
    CHECK(dyn_sum / dyn_n > 0.03);
    CHECK(dyn_sum / dyn_n > 2.0 * (sta_sum / sta_n));
}

TEST_CASE("render: deterministic for a fixed config") {
    auto cfg = SceneConfig::default_dynamic(32, 24, 11);
    auto a = render_scene(cfg);
    auto b = render_scene(cfg);
    for (int c = 0; c < 3; ++c) CHECK(a.image_a[c].data() == b.image_a[c].data());
    CHECK(a.depth_a_gt.data() == b.depth_a_gt.data());
    CHECK(a.pseudo_depth_a.data() == b.pseudo_depth_a.data());
    auto c2 = render_scene(SceneConfig::default_dynamic(32, 24, 12));
    CHECK(a.image_a[0].data() != c2.image_a[0].data());
}

TEST_CASE("render: noise amplitude bounds the per-pixel image difference") {
    auto quiet = SceneConfig::default_static(32, 24, 13);
    auto noisy = quiet;
    noisy.noise = 0.02;
    auto sa = render_scene(quiet), sb = render_scene(noisy);
    double max_diff = 0;
    for (int c = 0; c < 3; ++c)
        for (size_t i = 0; i < sa.image_a[c].size(); ++i)
            max_diff = std::max(max_diff,
                                std::abs(sa.image_a[c][i] - sb.image_a[c][i]));
    CHECK(max_diff > 0.0);
    CHECK(max_diff <= 0.02 + 1e-12);
}

TEST_CASE("pseudo-depth: identity parameters reproduce the ground truth") {
    auto s = render_scene(SceneConfig::default_static(32, 24, 17));
    PseudoDepthConfig cfg;
    cfg.gain = 1.0;
    cfg.exponent = 1.0;
    cfg.offset = 0.0;
    auto pd = make_pseudo_depth(s.depth_a_gt, cfg);
    for (size_t i = 0; i < pd.size(); ++i) CHECK(pd[i] == s.depth_a_gt[i]);
}

TEST_CASE("pseudo-depth: affine map applied exactly") {
    ScalarGrid gt(3, 3);
    for (size_t i = 0; i < 9; ++i) gt[i] = 1.0 + double(i);
    PseudoDepthConfig cfg;
    cfg.gain = 0.5;
    cfg.offset = 0.1;
    auto pd = make_pseudo_depth(gt, cfg);
    for (size_t i = 0; i < 9; ++i)
        CHECK(pd[i] == doctest::Approx(0.5 * gt[i] + 0.1).epsilon(1e-15));
}

TEST_CASE("pseudo-depth: nonlinear exponent preserves strict ordering") {
    auto s = render_scene(SceneConfig::default_dynamic(32, 24, 19));
    PseudoDepthConfig cfg;
    cfg.gain = 0.8;
    cfg.exponent = 1.3;
    cfg.offset = 0.2;
    auto pd = make_pseudo_depth(s.depth_a_gt, cfg);
    for (size_t i = 0; i < pd.size(); ++i)
        for (size_t j = i + 1; j < pd.size(); j += 37) {
            if (s.depth_a_gt[i] < s.depth_a_gt[j]) CHECK(pd[i] < pd[j]);
            if (s.depth_a_gt[i] > s.depth_a_gt[j]) CHECK(pd[i] > pd[j]);
        }
}

TEST_CASE("pseudo-depth: mild smoothing passes the ordinal audit") {
    auto s = render_scene(SceneConfig::default_static(48, 36, 23));
    PseudoDepthConfig cfg;
    cfg.smoothing_radius = 1;
    auto pd = make_pseudo_depth(s.depth_a_gt, cfg);
    CHECK(all_finite(pd));
}

TEST_CASE("pseudo-depth: destructive smoothing fails the ordinal audit") {
    // alternating near/far columns: any wide box filter flips confident pairs
    ScalarGrid gt(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) gt(y, x) = (x % 2 == 0) ? 1.0 : 10.0;
    PseudoDepthConfig cfg;
    cfg.smoothing_radius = 4;
    CHECK_THROWS_WITH_AS(make_pseudo_depth(gt, cfg),
                         doctest::Contains("smaller smoothing radius"), std::runtime_error);
}

TEST_CASE("pseudo-depth: rejects invalid parameters and non-positive depth") {
    PseudoDepthConfig bad;
    bad.gain = 0.0;
    CHECK_THROWS_AS(make_pseudo_depth(ScalarGrid(2, 2, 1.0), bad), std::invalid_argument);
    ScalarGrid gt(2, 2, 1.0);
    gt[3] = -1.0;
    CHECK_THROWS_AS(make_pseudo_depth(gt, PseudoDepthConfig{}), std::domain_error);
}

TEST_CASE("render: two-plane scene exposes distinct normal populations") {
    auto s = render_scene(SceneConfig::two_plane(48, 36, 29));
    // some pixels fronto-parallel, some slanted: x-components differ
    double min_nx = 1e9, max_nx = -1e9;
    for (const auto& n : s.normals_a_gt.n.data()) {
        min_nx = std::min(min_nx, n.x);
        max_nx = std::max(max_nx, n.x);
    }
    CHECK(max_nx - min_nx > 0.1);
    for (const auto& n : s.normals_a_gt.n.data())
        CHECK(std::abs(std::sqrt(n.dot(n)) - 1.0) < 1e-9);
}

TEST_CASE("render: rejects degenerate image sizes") {
    SceneConfig c = single_plane_scene();
    c.width = 1;
    CHECK_THROWS_AS(render_scene(c), std::invalid_argument);
}
