#pragma once

#include "scdepth/loss_eval.hpp"
#include "scdepth/optimize.hpp"

namespace scdepth {

/// True when the evaluation point keeps a safety margin from every kink of
/// the objective: warp coordinates away from bilinear cell boundaries, and
/// the L1 residuals of the photometric and geometry terms away from zero.
/// Central differencing across a kink compares slopes of different linear
/// pieces, so checks are only meaningful at smooth points.
inline bool gradcheck_point_is_smooth(const SceneSample& sample, const ScalarGrid& depth_a,
                                      const ScalarGrid& depth_b, const PoseSE3& pose,
                                      double margin_px = 1e-3, double margin_res = 1e-5) {
    FlowFieldT<double> flow = compute_warp(depth_a, pose, sample.intrinsics);
    for (size_t i = 0; i < depth_a.size(); ++i) {
        if (flow.valid[i] == 0.0) continue;
        double fx = flow.x[i] - std::floor(flow.x[i]);
        double fy = flow.y[i] - std::floor(flow.y[i]);
        if (fx < margin_px || fx > 1.0 - margin_px) return false;
        if (fy < margin_px || fy > 1.0 - margin_px) return false;
        for (int c = 0; c < 3; ++c) {
            double synth = bilinear_at(sample.image_b[c], flow.x[i], flow.y[i]);
            if (std::abs(sample.image_a[c][i] - synth) < margin_res) return false;
        }
        double d_interp = bilinear_at(depth_b, flow.x[i], flow.y[i]);
        if (std::abs(flow.depth[i] - d_interp) < margin_res) return false;
    }
    return true;
}

/// Multiplicative off-ground-truth perturbation for gradient checking;
/// `phase` reseeds the pattern so callers can search for a smooth point.
inline void gradcheck_perturb_depths(ScalarGrid& depth_a, ScalarGrid& depth_b, uint64_t phase) {
    for (size_t i = 0; i < depth_a.size(); ++i)
        depth_a[i] *= 1.0 + 0.3 * std::sin(0.7 * double(i) + 0.37 * double(phase));
    for (size_t i = 0; i < depth_b.size(); ++i)
        depth_b[i] *= 1.0 + 0.3 * std::cos(0.9 * double(i) + 0.51 * double(phase));
}

/// Max relative error between the analytic gradient and central finite
/// differences, over every depth pixel of both views plus the 6 pose
/// parameters. Both sides are evaluated against the same frozen context.
/// `inject_bug` corrupts one analytic entry first (test hook for verifying
/// that the checker actually fails).
inline double gradcheck_max_rel_error(const SceneSample& sample, const ScalarGrid& depth_a,
                                      const ScalarGrid& depth_b, const PoseSE3& pose,
                                      const LossOptions& opts, double step,
                                      bool inject_bug = false) {
    EvalContext ctx = freeze_context(sample, depth_a, depth_b, pose, opts);
    LossReport rep = loss_with_gradients(sample, depth_a, depth_b, pose, opts, ctx);

    size_t na = depth_a.size(), nb = depth_b.size();
    std::vector<double> x(na + nb + 6), g(na + nb + 6);
    std::copy(depth_a.data().begin(), depth_a.data().end(), x.begin());
    std::copy(depth_b.data().begin(), depth_b.data().end(), x.begin() + na);
    std::copy(rep.grad_depth_a.data().begin(), rep.grad_depth_a.data().end(), g.begin());
    std::copy(rep.grad_depth_b.data().begin(), rep.grad_depth_b.data().end(), g.begin() + na);
    for (int i = 0; i < 6; ++i) {
        x[na + nb + i] = 0.0;
        g[na + nb + i] = rep.grad_pose[i];
    }
    if (inject_bug) g[na / 2] += 1e-3;

    ScalarGrid da = depth_a, db = depth_b;
    auto f = [&](const std::vector<double>& xv) {
        std::copy(xv.begin(), xv.begin() + na, da.data().begin());
        std::copy(xv.begin() + na, xv.begin() + na + nb, db.data().begin());
        std::array<double, 6> delta;
        std::copy(xv.begin() + na + nb, xv.end(), delta.begin());
        return evaluate_loss(sample, da, db, perturb_pose(pose, delta), opts, ctx).total;
    };
    return finite_diff_check(f, x, g, step);
}

}  // namespace scdepth
