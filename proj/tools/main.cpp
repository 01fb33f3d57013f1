// Command-line surface: scene generation, loss inspection, gradient
// checking, toy depth-field training, and metric evaluation.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "scdepth/gradcheck.hpp"
#include "scdepth/grid_io.hpp"
#include "scdepth/metrics.hpp"
#include "scdepth/optimize.hpp"
#include "scdepth/png16.hpp"
#include "scdepth/run_config.hpp"
#include "scdepth/scene_io.hpp"

namespace fs = std::filesystem;
using namespace scdepth;

namespace {

RunConfig load_config(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return RunConfig::parse_file(path);
}

// Block-averaged downsample to a size x size grid, with intrinsics rescaled
// to match. Keeping the focal length proportional to the small grid keeps
// finite differencing well conditioned (coordinate sensitivities stay small).
SceneSample downsample_sample(const SceneSample& s, int size) {
    int h = s.depth_a_gt.height(), w = s.depth_a_gt.width();
    if (size > h || size > w) throw std::invalid_argument("downsample target larger than scene");
    int ky = h / size, kx = w / size;
    int oy = (h - ky * size) / 2, ox = (w - kx * size) / 2;
    auto down = [&](const ScalarGrid& g) {
        ScalarGrid out(size, size);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                double sum = 0;
                for (int dy = 0; dy < ky; ++dy)
                    for (int dx = 0; dx < kx; ++dx) sum += g(oy + y * ky + dy, ox + x * kx + dx);
                out(y, x) = sum / double(kx * ky);
            }
        return out;
    };
    SceneSample out;
    for (int c = 0; c < 3; ++c) {
        out.image_a[c] = down(s.image_a[c]);
        out.image_b[c] = down(s.image_b[c]);
    }
    out.depth_a_gt = down(s.depth_a_gt);
    out.depth_b_gt = down(s.depth_b_gt);
    out.dynamic_mask_a = down(s.dynamic_mask_a);
    out.dynamic_mask_b = down(s.dynamic_mask_b);
    for (auto* m : {&out.dynamic_mask_a, &out.dynamic_mask_b})
        for (auto& v : m->data()) v = v > 0.5 ? 1.0 : 0.0;
    out.pseudo_depth_a = down(s.pseudo_depth_a);
    out.pseudo_depth_b = down(s.pseudo_depth_b);
    out.normals_a_gt.n = GridT<Vec3>(size, size);
    out.normals_a_gt.degenerate = ScalarGrid(size, size, 0.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            Vec3 sum{0, 0, 0};
            for (int dy = 0; dy < ky; ++dy)
                for (int dx = 0; dx < kx; ++dx)
                    sum = sum + s.normals_a_gt.n(oy + y * ky + dy, ox + x * kx + dx);
            double norm = std::sqrt(sum.dot(sum));
            out.normals_a_gt.n(y, x) = norm > 0 ? sum * (1.0 / norm) : Vec3{0, 0, -1};
        }
    out.pose_ab = s.pose_ab;
    out.intrinsics = s.intrinsics;
    out.intrinsics.fx /= kx;
    out.intrinsics.fy /= ky;
    out.intrinsics.cx = (out.intrinsics.cx - ox) / kx;
    out.intrinsics.cy = (out.intrinsics.cy - oy) / ky;
    out.intrinsics.width = size;
    out.intrinsics.height = size;
    return out;
}

void apply_ablation(TermWeights& w, const std::string& mode) {
    if (mode == "baseline") {
        w = TermWeights::baseline();
    } else if (mode == "no-drr") {
        w.lcdr = 0.0;
    } else if (mode == "no-lsr") {
        w.ln = 0.0;
        w.lern = 0.0;
        w.ls = 0.1;  // restore the smoothness regularizer the normal terms replaced
    } else {
        throw std::invalid_argument("unknown ablation '" + mode + "'");
    }
}

ScalarGrid load_depth_arg(const std::string& arg, const ScalarGrid& gt) {
    if (arg == "gt") return gt;
    return read_scalar_grid(arg);
}

void print_report(const LossReport& rep) {
    std::cout.precision(12);
    for (const auto& [name, value] : rep.per_term)
        std::cout << "term." << name << "=" << value << "\n";
    for (const auto& [name, w] : rep.weights) std::cout << "weight." << name << "=" << w << "\n";
    std::cout << "total=" << rep.total << "\n";
    for (const auto& w : rep.warnings) std::cout << "warning=" << w << "\n";
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, uint64_t seed,
              bool seed_set, bool png) {
    RunConfig cfg = load_config(config_path);
    if (seed_set) cfg.scene_seed = seed;
    SceneConfig sc = cfg.scene_config();
    PseudoDepthConfig pd = cfg.pseudo;
    SceneSample sample = render_scene(sc, pd);
    write_scene(out_dir, sample, cfg.scene_seed);
    if (png) {
        write_png16(fs::path(out_dir) / "depth_a_gt.png", sample.depth_a_gt);
        write_png16(fs::path(out_dir) / "pseudo_depth_a.png", sample.pseudo_depth_a);
    }
    std::cout << "scene written to " << out_dir << "\n";
    return 0;
}

int cmd_inspect_loss(const std::string& scene_dir, const std::string& depth_a_arg,
                     const std::string& depth_b_arg, const std::string& config_path,
                     const std::vector<std::string>& ablations, const std::string& maps_dir) {
    RunConfig cfg = load_config(config_path);
    LoadedScene scene = read_scene(scene_dir);
    LossOptions opts = cfg.loss;
    for (const auto& a : ablations) apply_ablation(opts.weights, a);
    ScalarGrid da = load_depth_arg(depth_a_arg, scene.sample.depth_a_gt);
    ScalarGrid db = load_depth_arg(depth_b_arg, scene.sample.depth_b_gt);
    LossReport rep = evaluate_loss(scene.sample, da, db, scene.sample.pose_ab, opts);
    print_report(rep);
    if (!maps_dir.empty()) {
        fs::create_directories(maps_dir);
        EvalContext ctx = freeze_context(scene.sample, da, db, scene.sample.pose_ab, opts);
        write_scalar_grid(fs::path(maps_dir) / "self_mask.grid", ctx.mask);
        write_scalar_grid(fs::path(maps_dir) / "valid.grid", ctx.valid);
        write_scalar_grid(fs::path(maps_dir) / "automask.grid", ctx.automask);
    }
    return 0;
}

int cmd_gradcheck(const std::string& scene_dir, const std::string& config_path, double step,
                  double tol, int crop, bool inject_bug) {
    RunConfig cfg = load_config(config_path);
    LoadedScene scene = read_scene(scene_dir);
    SceneSample small = downsample_sample(scene.sample, crop);

    // check at an off-minimum point, away from bilinear / L1 kinks
    ScalarGrid da, db;
    bool smooth = false;
    for (uint64_t phase = 0; phase < 64 && !smooth; ++phase) {
        da = small.depth_a_gt;
        db = small.depth_b_gt;
        gradcheck_perturb_depths(da, db, phase);
        smooth = gradcheck_point_is_smooth(small, da, db, small.pose_ab);
    }
    if (!smooth) std::cout << "warning=no kink-free evaluation point found\n";

    const char* terms[] = {"L_P", "L_P^M", "L_G", "L_S", "L_N", "L_CDR", "L_ERN"};
    bool ok = true;
    std::cout.precision(6);
    for (const char* t : terms) {
        LossOptions o = cfg.loss;
        o.weights = TermWeights::only(t);
        double err = gradcheck_max_rel_error(small, da, db, small.pose_ab, o, step, inject_bug);
        bool pass = err < tol;
        ok = ok && pass;
        std::cout << "term=" << t << " max_rel_err=" << err << " " << (pass ? "PASS" : "FAIL")
                  << "\n";
    }
    {
        LossOptions o = cfg.loss;
        double err = gradcheck_max_rel_error(small, da, db, small.pose_ab, o, step, inject_bug);
        bool pass = err < tol;
        ok = ok && pass;
        std::cout << "term=total max_rel_err=" << err << " " << (pass ? "PASS" : "FAIL") << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_train(const std::string& scene_dir, const std::string& config_path,
              const std::string& out_dir, bool baseline, bool no_drr, bool no_lsr,
              uint64_t seed, bool seed_set, double init_depth, bool png) {
    RunConfig cfg = load_config(config_path);
    if (seed_set) cfg.optimizer.seed = seed;
    LoadedScene scene = read_scene(scene_dir);
    LossOptions opts = cfg.loss;
    if (baseline) apply_ablation(opts.weights, "baseline");
    if (no_drr) apply_ablation(opts.weights, "no-drr");
    if (no_lsr) apply_ablation(opts.weights, "no-lsr");
    opts.ranking.seed = cfg.optimizer.seed;
    opts.edge.seed = cfg.optimizer.seed + 1;

    int h = scene.sample.depth_a_gt.height(), w = scene.sample.depth_a_gt.width();
    DepthField init_a = DepthField::constant(h, w, init_depth);
    DepthField init_b = DepthField::constant(h, w, init_depth);
    OptimizeResult res =
        optimize_depth(scene.sample, init_a, init_b, PoseSE3{}, cfg.optimizer, opts);

    fs::create_directories(out_dir);
    write_scalar_grid(fs::path(out_dir) / "depth_a.grid", res.depth_a.depth());
    write_scalar_grid(fs::path(out_dir) / "depth_b.grid", res.depth_b.depth());
    {
        std::ofstream os(fs::path(out_dir) / "loss_history.txt");
        os.precision(17);
        for (size_t i = 0; i < res.loss_history.size(); ++i)
            os << "iter." << i << "=" << res.loss_history[i] << "\n";
        os << "iterations=" << res.iterations << "\nconverged=" << (res.converged ? 1 : 0)
           << "\n";
    }
    {
        ScalarGrid valid(h, w, 1.0);
        RegionMetricReports reg =
            region_metrics(res.depth_a.depth(), scene.sample.depth_a_gt,
                           scene.sample.dynamic_mask_a, valid, cfg.eval_cap);
        std::ofstream os(fs::path(out_dir) / "metrics.txt");
        os << "global_scale=" << reg.global_scale << "\n";
        os << format_report(reg.full, "full.");
        os << format_report(reg.dynamic, "dynamic.");
        os << format_report(reg.static_region, "static.");
    }
    if (png) write_png16(fs::path(out_dir) / "depth_a.png", res.depth_a.depth());
    std::cout << "final_loss=" << (res.loss_history.empty() ? 0.0 : res.loss_history.back())
              << "\n";
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& mask_path, double cap) {
    ScalarGrid pred = read_scalar_grid(pred_path);
    ScalarGrid gt = read_scalar_grid(gt_path);
    ScalarGrid valid(gt.height(), gt.width(), 1.0);
    std::cout.precision(12);
    if (mask_path.empty()) {
        std::cout << "notice=no dynamic mask supplied; full-image metrics only\n";
        ScalarGrid capped = valid;
        for (size_t i = 0; i < gt.size(); ++i)
            if (gt[i] <= 0.0 || gt[i] > cap) capped[i] = 0.0;
        double s = median_scale(pred, gt, capped);  // throws if cap excludes everything
        MetricReport full = depth_metrics(pred, gt, capped, cap, s);
        std::cout << "global_scale=" << s << "\n" << format_report(full, "full.");
        return 0;
    }
    ScalarGrid mask = read_scalar_grid(mask_path);
    RegionMetricReports reg = region_metrics(pred, gt, mask, valid, cap);
    std::cout << "global_scale=" << reg.global_scale << "\n";
    std::cout << format_report(reg.full, "full.");
    std::cout << format_report(reg.dynamic, "dynamic.");
    std::cout << format_report(reg.static_region, "static.");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SC-DepthV3 objective toolkit: synthetic scenes, loss inspection, "
                 "gradient checking, toy training, and depth evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, scene_dir;
    std::string depth_a_arg = "gt", depth_b_arg = "gt", maps_dir, pred_path, gt_path, mask_path;
    std::vector<std::string> ablations;
    uint64_t seed = 0;
    double step = 1e-5, tol = 1e-4, cap = 80.0, init_depth = 5.0;
    int crop = 8;
    bool png = false, inject_bug = false, baseline = false, no_drr = false, no_lsr = false;

    auto* synth = app.add_subcommand("synth", "Render a two-view synthetic scene to a directory");
    synth->add_option("--config", config_path, "Run configuration file");
    synth->add_option("--out", out_dir, "Output scene directory")->required();
    auto* synth_seed = synth->add_option("--seed", seed, "Override the scene seed");
    synth->add_flag("--png", png, "Also export 16-bit PNG depth previews");

    auto* inspect = app.add_subcommand("inspect-loss", "Evaluate every loss term on a scene");
    inspect->add_option("--scene", scene_dir, "Scene directory")->required();
    inspect->add_option("--depth-a", depth_a_arg, "Depth grid for view a, or 'gt'");
    inspect->add_option("--depth-b", depth_b_arg, "Depth grid for view b, or 'gt'");
    inspect->add_option("--config", config_path, "Run configuration file");
    inspect->add_option("--ablate", ablations, "Ablation: baseline, no-drr, no-lsr");
    inspect->add_option("--loss-maps", maps_dir, "Directory for per-pixel map grids");

    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check per loss term");
    gradcheck->add_option("--scene", scene_dir, "Scene directory")->required();
    gradcheck->add_option("--config", config_path, "Run configuration file");
    gradcheck->add_option("--step", step, "Finite-difference step");
    gradcheck->add_option("--tol", tol, "Max relative error tolerance");
    gradcheck->add_option("--crop", crop, "Center-crop size");
    gradcheck->add_flag("--inject-bug", inject_bug,
                        "Corrupt one analytic gradient entry (self-test hook)");

    auto* train = app.add_subcommand("train", "Fit depth fields + pose to a scene");
    train->add_option("--scene", scene_dir, "Scene directory")->required();
    train->add_option("--config", config_path, "Run configuration file");
    train->add_option("--out", out_dir, "Output directory")->required();
    train->add_flag("--baseline", baseline, "Photometric + geometry + smoothness only");
    train->add_flag("--no-drr", no_drr, "Drop the depth-ranking term");
    train->add_flag("--no-lsr", no_lsr, "Drop the normal terms (restores smoothness)");
    auto* train_seed = train->add_option("--seed", seed, "Override the optimizer seed");
    train->add_option("--init-depth", init_depth, "Constant depth initialization (m)");
    train->add_flag("--png", png, "Also export a 16-bit PNG depth preview");

    auto* eval = app.add_subcommand("eval", "Median-scaled depth metrics");
    eval->add_option("--pred", pred_path, "Predicted depth grid")->required();
    eval->add_option("--gt", gt_path, "Ground-truth depth grid")->required();
    eval->add_option("--mask", mask_path, "Binary dynamic-region mask grid");
    eval->add_option("--cap", cap, "Max ground-truth depth (m)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(config_path, out_dir, seed, !synth_seed->empty(), png);
        if (inspect->parsed())
            return cmd_inspect_loss(scene_dir, depth_a_arg, depth_b_arg, config_path, ablations,
                                    maps_dir);
        if (gradcheck->parsed())
            return cmd_gradcheck(scene_dir, config_path, step, tol, crop, inject_bug);
        if (train->parsed())
            return cmd_train(scene_dir, config_path, out_dir, baseline, no_drr, no_lsr, seed,
                             !train_seed->empty(), init_depth, png);
        if (eval->parsed()) return cmd_eval(pred_path, gt_path, mask_path, cap);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
