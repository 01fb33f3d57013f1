#include <doctest.h>

#include <cmath>

#include "scdepth/gradcheck.hpp"
#include "scdepth/rng.hpp"

using namespace scdepth;

namespace {

SceneSample small_scene(uint64_t seed, bool dynamic = false) {
    auto cfg = dynamic ? SceneConfig::default_dynamic(8, 8, seed)
                       : SceneConfig::default_static(8, 8, seed);
    return render_scene(cfg);
}

struct SmoothPoint {
    ScalarGrid da, db;
};

// perturbed off-GT depths at a kink-free evaluation point
SmoothPoint find_smooth_point(const SceneSample& s) {
    for (uint64_t phase = 0; phase < 64; ++phase) {
        ScalarGrid da = s.depth_a_gt, db = s.depth_b_gt;
        gradcheck_perturb_depths(da, db, phase);
        if (gradcheck_point_is_smooth(s, da, db, s.pose_ab)) return {da, db};
    }
    FAIL("no kink-free evaluation point found");
    return {};
}

}  // namespace

TEST_CASE("finite_diff_check: quadratic with the exact analytic gradient") {
    auto f = [](const std::vector<double>& x) { return x[0] * x[0]; };
    CHECK(finite_diff_check(f, {3.0}, {6.0}, 1e-5) < 1e-9);
    // a wrong gradient is flagged with the expected relative error
    CHECK(finite_diff_check(f, {3.0}, {5.0}, 1e-5) == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
}

TEST_CASE("finite_diff_check: linear functions are exact under central differences") {
    auto f = [](const std::vector<double>& x) { return 2.0 * x[0] - 3.0 * x[1] + 1.0; };
    CHECK(finite_diff_check(f, {0.7, -0.4}, {2.0, -3.0}, 1e-5) < 1e-9);
}

TEST_CASE("tape: elementary operation derivatives") {
    Tape tape;
    Tape::Scope scope(tape);
    Var x = tape.variable(1.3), y = tape.variable(0.7);
    Var out = x * y + sin(x) / y + exp(y) - log(x) + sqrt(x) + softplus(y) + abs(-x);
    auto adj = tape.gradient(out);
    double dx = 0.7 + std::cos(1.3) / 0.7 - 1.0 / 1.3 + 0.5 / std::sqrt(1.3) - (-1.0);
    double dy = 1.3 - std::sin(1.3) / (0.7 * 0.7) + std::exp(0.7) +
                1.0 / (1.0 + std::exp(-0.7));
    CHECK(adj[x.idx] == doctest::Approx(dx).epsilon(1e-12));
    CHECK(adj[y.idx] == doctest::Approx(dy).epsilon(1e-12));
}

TEST_CASE("tape: min/max pick one branch, constants carry no gradient") {
    Tape tape;
    Tape::Scope scope(tape);
    Var x = tape.variable(2.0);
    Var out = min(x, Var(5.0)) + max(x, Var(5.0)) * 3.0;
    auto adj = tape.gradient(out);
    CHECK(adj[x.idx] == 1.0);  // min takes x, max takes the constant 5
    CHECK(value_of(out) == doctest::Approx(17.0));
}

TEST_CASE("full objective: analytic gradients match finite differences") {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        auto s = small_scene(seed, seed == 3);
        auto pt = find_smooth_point(s);
        LossOptions opts;
        opts.weights = TermWeights::full();
        opts.weights.lp = 0.1;
        opts.weights.ls = 0.1;  // exercise every term at once
        double err = gradcheck_max_rel_error(s, pt.da, pt.db, s.pose_ab, opts, 1e-5);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("full objective: the checker catches an injected gradient bug") {
    auto s = small_scene(1);
    auto pt = find_smooth_point(s);
    LossOptions opts;
    double err = gradcheck_max_rel_error(s, pt.da, pt.db, s.pose_ab, opts, 1e-5,
                                         /*inject_bug=*/true);
    CHECK(err > 1e-3);
}

TEST_CASE("per-term gradients each match finite differences") {
    auto s = small_scene(2, true);
    auto pt = find_smooth_point(s);
    for (const char* term : {"L_P", "L_P^M", "L_G", "L_S", "L_N", "L_CDR", "L_ERN"}) {
        CAPTURE(term);
        LossOptions opts;
        opts.weights = TermWeights::only(term);
        double err = gradcheck_max_rel_error(s, pt.da, pt.db, s.pose_ab, opts, 1e-5);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("gradient of a masked-out pixel is exactly zero") {
    auto s = small_scene(4);
    auto pt = find_smooth_point(s);
    LossOptions opts;
    opts.weights = TermWeights{0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0};  // masked photometric only
    opts.photometric.lambda = 1.0;  // pure L1: no cross-pixel coupling via SSIM windows
    EvalContext ctx = freeze_context(s, pt.da, pt.db, s.pose_ab, opts);
    // force one pixel out of the photometric valid set
    size_t victim = pt.da.size() / 2;
    ctx.valid_phot[victim] = 0.0;
    auto rep = loss_with_gradients(s, pt.da, pt.db, s.pose_ab, opts, ctx);
    CHECK(rep.grad_depth_a[victim] == 0.0);
    // a live neighbor still carries gradient
    bool any_nonzero = false;
    for (double g : rep.grad_depth_a.data()) any_nonzero = any_nonzero || g != 0.0;
    CHECK(any_nonzero);
}

TEST_CASE("negative gradient is a descent direction") {
    auto s = small_scene(5);
    auto pt = find_smooth_point(s);
    LossOptions opts;
    EvalContext ctx = freeze_context(s, pt.da, pt.db, s.pose_ab, opts);
    auto rep = loss_with_gradients(s, pt.da, pt.db, s.pose_ab, opts, ctx);
    REQUIRE(rep.has_gradients);
    double gnorm_sq = 0;
    for (double g : rep.grad_depth_a.data()) gnorm_sq += g * g;
    for (double g : rep.grad_depth_b.data()) gnorm_sq += g * g;
    REQUIRE(gnorm_sq > 0.0);
    double step = 1e-6 / std::sqrt(gnorm_sq);
    ScalarGrid da = pt.da, db = pt.db;
    for (size_t i = 0; i < da.size(); ++i) da[i] -= step * rep.grad_depth_a[i];
    for (size_t i = 0; i < db.size(); ++i) db[i] -= step * rep.grad_depth_b[i];
    double after = evaluate_loss(s, da, db, s.pose_ab, opts, ctx).total;
    CHECK(after < rep.total);
}

TEST_CASE("gradients and loss are finite and reported per term") {
    auto s = small_scene(6, true);
    auto pt = find_smooth_point(s);
    LossOptions opts;
    auto rep = loss_with_gradients(s, pt.da, pt.db, s.pose_ab, opts);
    CHECK(rep.has_gradients);
    CHECK(std::isfinite(rep.total));
    CHECK(all_finite(rep.grad_depth_a));
    CHECK(all_finite(rep.grad_depth_b));
    for (double g : rep.grad_pose) CHECK(std::isfinite(g));
    for (const char* term : {"L_P^M", "L_G", "L_N", "L_CDR", "L_ERN"})
        CHECK(rep.per_term.count(term) == 1);
    // weighted terms sum to the total
    double sum = 0;
    for (const auto& [name, v] : rep.per_term) sum += rep.weights.at(name) * v;
    CHECK(rep.total == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("pose gradient: identity perturbation reproduces the pose") {
    PoseSE3 p;
    p.rotation = axis_angle_to_matrix({0.1, -0.2, 0.05});
    p.translation = {0.3, 0.1, -0.4};
    PoseSE3 q = perturb_pose(p, {0, 0, 0, 0, 0, 0});
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(q.rotation[r][c] == doctest::Approx(p.rotation[r][c]));
    CHECK(q.translation.x == doctest::Approx(p.translation.x));
    PoseSE3 t = perturb_pose(p, {0, 0, 0, 0.5, 0, 0});
    CHECK(t.translation.x == doctest::Approx(p.translation.x + 0.5));
}
