#include "scdepth/synthetic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "scdepth/rng.hpp"

namespace scdepth {

namespace {

double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

double lattice(uint64_t seed, int64_t ix, int64_t iy) {
    uint64_t key = uint64_t(ix) * 0x8da6b343ULL + uint64_t(iy) * 0xd8163841ULL;
    return Rng::hash01(seed, key);
}

double value_noise(uint64_t seed, double u, double v) {
    double fu = std::floor(u), fv = std::floor(v);
    int64_t iu = int64_t(fu), iv = int64_t(fv);
    double tu = fade(u - fu), tv = fade(v - fv);
    double n00 = lattice(seed, iu, iv), n10 = lattice(seed, iu + 1, iv);
    double n01 = lattice(seed, iu, iv + 1), n11 = lattice(seed, iu + 1, iv + 1);
    double top = n00 + (n10 - n00) * tu;
    double bot = n01 + (n11 - n01) * tu;
    return top + (bot - top) * tv;
}

struct Hit {
    double depth = std::numeric_limits<double>::infinity();
    Vec3 point{};        // world (frame-a) coordinates
    Vec3 normal{};       // outward surface normal, world frame
    double tex_u = 0, tex_v = 0;
    const TextureConfig* texture = nullptr;
    bool is_box = false;
    bool valid = false;
};

void plane_basis(const Vec3& n, Vec3& b1, Vec3& b2) {
    Vec3 up = std::abs(n.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    b1 = up.cross(n);
    double l = std::sqrt(b1.dot(b1));
    b1 = b1 * (1.0 / l);
    b2 = n.cross(b1);
}

// Ray o + s*d, s is the pinhole depth when d has unit camera-z.
void intersect_plane(const PlaneConfig& pl, const Vec3& o, const Vec3& d, Hit& best) {
    double denom = d.dot(pl.normal);
    if (std::abs(denom) < 1e-12) return;
    double s = (pl.point - o).dot(pl.normal) / denom;
    if (s < 1e-6 || s >= best.depth) return;
    Vec3 p = o + d * s;
    Vec3 b1, b2;
    plane_basis(pl.normal, b1, b2);
    Vec3 rel = p - pl.point;
    best = Hit{s, p, pl.normal, rel.dot(b1), rel.dot(b2), &pl.texture, false, true};
}

void intersect_box(const BoxConfig& box, const Vec3& center, const Vec3& o, const Vec3& d,
                   Hit& best) {
    // slab test on the axis-aligned box around `center`
    double tmin = 1e-6, tmax = best.depth;
    int axis_min = -1;
    double lo[3] = {center.x - box.half_extents.x, center.y - box.half_extents.y,
                    center.z - box.half_extents.z};
    double hi[3] = {center.x + box.half_extents.x, center.y + box.half_extents.y,
                    center.z + box.half_extents.z};
    double ov[3] = {o.x, o.y, o.z}, dv[3] = {d.x, d.y, d.z};
    int sign_min = 0;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dv[a]) < 1e-15) {
            if (ov[a] < lo[a] || ov[a] > hi[a]) return;
            continue;
        }
        double inv = 1.0 / dv[a];
        double t0 = (lo[a] - ov[a]) * inv, t1 = (hi[a] - ov[a]) * inv;
        int sgn = -1;
        if (t0 > t1) {
            std::swap(t0, t1);
            sgn = 1;
        }
        if (t0 > tmin) {
            tmin = t0;
            axis_min = a;
            sign_min = sgn;
        }
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return;
    }
    if (axis_min < 0 || tmin >= best.depth) return;
    Vec3 p = o + d * tmin;
    Vec3 n{0, 0, 0};
    if (axis_min == 0) n.x = sign_min;
    if (axis_min == 1) n.y = sign_min;
    if (axis_min == 2) n.z = sign_min;
    // texture in box-local coordinates, so the box carries its texture
    Vec3 local = p - center;
    double u, v;
    if (axis_min == 0) {
        u = local.y;
        v = local.z;
    } else if (axis_min == 1) {
        u = local.x;
        v = local.z;
    } else {
        u = local.x;
        v = local.y;
    }
    best = Hit{tmin, p, n, u, v, &box.texture, true, true};
}

Hit cast_ray(const SceneConfig& cfg, const Vec3& o, const Vec3& d, const Vec3& box_center) {
    Hit best;
    for (const auto& pl : cfg.planes) intersect_plane(pl, o, d, best);
    if (cfg.box) intersect_box(*cfg.box, box_center, o, d, best);
    return best;
}

TextureConfig channel_texture(const TextureConfig& t, int channel) {
    TextureConfig c = t;
    c.seed = Rng::hash(t.seed, 0x1000 + channel);
    return c;
}

struct RenderedView {
    Image image;
    ScalarGrid depth;
    ScalarGrid dynamic_mask;
    NormalGrid normals;
};

RenderedView render_view(const SceneConfig& cfg, const PoseSE3& cam_from_world,
                         const Vec3& box_center, uint64_t noise_stream) {
    const CameraIntrinsics& K = cfg.intrinsics;
    int h = cfg.height, w = cfg.width;
    RenderedView out{make_image(h, w), ScalarGrid(h, w), ScalarGrid(h, w, 0.0),
                     NormalGrid{GridT<Vec3>(h, w), ScalarGrid(h, w, 0.0)}};
    PoseSE3 world_from_cam = cam_from_world.inverse();
    Vec3 origin = world_from_cam.translation;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Vec3 dir_cam{(double(x) - K.cx) / K.fx, (double(y) - K.cy) / K.fy, 1.0};
            Vec3 dir = mat3_apply(world_from_cam.rotation, dir_cam);
            Hit hit = cast_ray(cfg, origin, dir, box_center);
            if (!hit.valid)
                throw std::invalid_argument("render_scene: ray misses all surfaces at pixel (" +
                                            std::to_string(x) + "," + std::to_string(y) +
                                            "); scenes must be fully covered");
            out.depth(y, x) = hit.depth;
            out.dynamic_mask(y, x) = hit.is_box ? 1.0 : 0.0;
            // normal in camera frame, oriented toward the camera
            Vec3 n_cam = mat3_apply(cam_from_world.rotation, hit.normal);
            if (n_cam.dot(dir_cam) > 0.0) n_cam = n_cam * -1.0;
            out.normals.n(y, x) = n_cam;
            for (int c = 0; c < 3; ++c) {
                double v = eval_texture(*hit.texture, hit.tex_u, hit.tex_v, c);
                if (cfg.noise > 0.0) {
                    uint64_t idx = (uint64_t(y) * w + x) * 3 + c;
                    v += (Rng::hash01(noise_stream, idx) * 2.0 - 1.0) * cfg.noise;
                }
                out.image[c](y, x) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return out;
}

}  // namespace

double eval_texture(const TextureConfig& tex, double u, double v, int channel) {
    TextureConfig ct = channel_texture(tex, channel);
    double sum = 0.0, amp = 1.0, amp_total = 0.0, freq = ct.base_frequency;
    for (int o = 0; o < ct.octaves; ++o) {
        sum += amp * value_noise(Rng::hash(ct.seed, o), u * freq, v * freq);
        amp_total += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    double centered = sum / amp_total - 0.5;
    return std::clamp(ct.offset + ct.contrast * centered * 2.0, 0.02, 0.98);
}

ScalarGrid make_pseudo_depth(const ScalarGrid& gt_depth, const PseudoDepthConfig& cfg) {
    cfg.validate();
    for (double d : gt_depth.data())
        if (d <= 0.0) throw std::domain_error("make_pseudo_depth: non-positive ground-truth depth");
    int h = gt_depth.height(), w = gt_depth.width();
    ScalarGrid pd(h, w);
    for (size_t i = 0; i < pd.size(); ++i)
        pd[i] = cfg.gain * std::pow(gt_depth[i], cfg.exponent) + cfg.offset;

    if (cfg.smoothing_radius > 0) {
        int r = cfg.smoothing_radius;
        ScalarGrid sm(h, w);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double sum = 0;
                int n = 0;
                for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
                    for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                        sum += pd(yy, xx);
                        ++n;
                    }
                sm(y, x) = sum / n;
            }
        }
        pd = sm;

        // sampled ordinal audit: pairs confidently separated in GT must keep
        // their ordering in the smoothed pseudo-depth
        Rng rng(cfg.seed ^ 0x5eedULL);
        size_t checked = 0, budget = 200000;
        while (checked < 10000 && budget-- > 0) {
            size_t i = size_t(rng.uniform(pd.size()));
            size_t j = size_t(rng.uniform(pd.size()));
            double ratio = gt_depth[i] / gt_depth[j];
            if (ratio < 1.0 + cfg.audit_tau && ratio > 1.0 / (1.0 + cfg.audit_tau)) continue;
            ++checked;
            bool gt_greater = gt_depth[i] > gt_depth[j];
            bool pd_greater = pd[i] > pd[j];
            if (gt_greater != pd_greater)
                throw std::runtime_error(
                    "make_pseudo_depth: smoothing flipped a confident ordinal pair; "
                    "use a smaller smoothing radius");
        }
    }
    return pd;
}

SceneSample render_scene(const SceneConfig& cfg, const PseudoDepthConfig& pseudo) {
    if (cfg.width < 2 || cfg.height < 2)
        throw std::invalid_argument("render_scene: image too small");
    SceneConfig c = cfg;
    if (c.intrinsics.fx == 0) {
        c.intrinsics.fx = c.intrinsics.fy = 0.9 * c.width;
        c.intrinsics.cx = (c.width - 1) / 2.0;
        c.intrinsics.cy = (c.height - 1) / 2.0;
        c.intrinsics.width = c.width;
        c.intrinsics.height = c.height;
    }
    c.intrinsics.validate();
    c.camera_motion.validate();

    Vec3 box_a = c.box ? c.box->center : Vec3{};
    Vec3 box_b = c.box ? c.box->center + c.box->displacement : Vec3{};

    PoseSE3 identity;
    RenderedView va = render_view(c, identity, box_a, Rng::hash(c.seed, 0xA));
    RenderedView vb = render_view(c, c.camera_motion, box_b, Rng::hash(c.seed, 0xB));

    SceneSample s;
    s.image_a = std::move(va.image);
    s.image_b = std::move(vb.image);
    s.depth_a_gt = std::move(va.depth);
    s.depth_b_gt = std::move(vb.depth);
    s.pose_ab = c.camera_motion;
    s.dynamic_mask_a = std::move(va.dynamic_mask);
    s.dynamic_mask_b = std::move(vb.dynamic_mask);
    s.normals_a_gt = std::move(va.normals);
    s.intrinsics = c.intrinsics;
    s.pseudo_depth_a = make_pseudo_depth(s.depth_a_gt, pseudo);
    s.pseudo_depth_b = make_pseudo_depth(s.depth_b_gt, pseudo);
    return s;
}

SceneSample render_scene(const SceneConfig& cfg) {
    return render_scene(cfg, PseudoDepthConfig{});
}

SceneConfig SceneConfig::default_static(int width, int height, uint64_t seed) {
    SceneConfig c;
    c.width = width;
    c.height = height;
    c.seed = seed;

    PlaneConfig ground;
    ground.point = {0, 1.5, 0};
    ground.normal = {0, -1, 0};
    // frequencies kept low so the bilinear resampling error of a ground-truth
    // warp stays below 1e-3: bilinear interpolation of a band-limited texture
    // has O(f'' h^2) error, quadratic in the spatial frequency
    ground.texture.seed = Rng::hash(seed, 1);
    ground.texture.base_frequency = 0.18;
    ground.texture.contrast = 0.6;

    PlaneConfig wall;
    wall.point = {0, 0, 8};
    wall.normal = {0, 0, -1};
    wall.texture.seed = Rng::hash(seed, 2);
    wall.texture.base_frequency = 0.22;
    wall.texture.contrast = 0.6;

    c.planes = {ground, wall};
    c.camera_motion.translation = {0.2, 0.03, 0.05};
    c.camera_motion.rotation = axis_angle_to_matrix({0.0, 0.01, 0.0});
    c.noise = 0.0;
    return c;
}

SceneConfig SceneConfig::default_dynamic(int width, int height, uint64_t seed) {
    SceneConfig c = default_static(width, height, seed);
    BoxConfig box;
    box.center = {0.4, 0.8, 4.0};
    box.half_extents = {0.7, 0.7, 0.7};
    box.displacement = {0.3, 0.0, 0.0};  // moves with the camera: photometric
                                         // parallax understates its depth error
    box.texture.seed = Rng::hash(seed, 3);
    box.texture.base_frequency = 0.8;
    box.texture.contrast = 0.7;
    c.box = box;
    return c;
}

SceneConfig SceneConfig::two_plane(int width, int height, uint64_t seed) {
    SceneConfig c;
    c.width = width;
    c.height = height;
    c.seed = seed;

    PlaneConfig wall;
    wall.point = {0, 0, 8};
    wall.normal = {0, 0, -1};
    wall.texture.seed = Rng::hash(seed, 4);
    wall.texture.base_frequency = 0.3;
    wall.texture.contrast = 0.6;

    PlaneConfig slanted;  // z = 5 + 2x; nearest surface over the left of the view
    slanted.point = {0, 0, 5.0};
    Vec3 n{-2.0, 0, 1.0};
    double l = std::sqrt(n.dot(n));
    slanted.normal = n * (-1.0 / l);
    slanted.texture.seed = Rng::hash(seed, 5);
    slanted.texture.base_frequency = 0.4;
    slanted.texture.contrast = 0.6;

    c.planes = {slanted, wall};
    c.camera_motion.translation = {0.15, 0.02, 0.0};
    return c;
}

}  // namespace scdepth
