#include <benchmark/benchmark.h>

#include "scdepth/loss_eval.hpp"
#include "scdepth/optimize.hpp"
#include "scdepth/synthetic.hpp"

using namespace scdepth;

namespace {

const SceneSample& scene() {
    static SceneSample s = render_scene(SceneConfig::default_dynamic(64, 48, 1));
    return s;
}

}  // namespace

static void BM_render_scene(benchmark::State& state) {
    auto cfg = SceneConfig::default_dynamic(int(state.range(0)), int(state.range(0)) * 3 / 4, 1);
    for (auto _ : state) {
        auto s = render_scene(cfg);
        benchmark::DoNotOptimize(s.image_a[0].data().data());
    }
}
BENCHMARK(BM_render_scene)->Arg(32)->Arg(64)->Arg(128);

static void BM_compute_warp(benchmark::State& state) {
    const auto& s = scene();
    for (auto _ : state) {
        auto f = compute_warp(s.depth_a_gt, s.pose_ab, s.intrinsics);
        benchmark::DoNotOptimize(f.x.data().data());
    }
}
BENCHMARK(BM_compute_warp);

static void BM_evaluate_loss_full(benchmark::State& state) {
    const auto& s = scene();
    LossOptions opts;  // full objective
    for (auto _ : state) {
        auto r = evaluate_loss(s, s.depth_a_gt, s.depth_b_gt, s.pose_ab, opts);
        benchmark::DoNotOptimize(r.total);
    }
}
BENCHMARK(BM_evaluate_loss_full);

static void BM_evaluate_loss_baseline(benchmark::State& state) {
    const auto& s = scene();
    LossOptions opts;
    opts.weights = TermWeights::baseline();
    for (auto _ : state) {
        auto r = evaluate_loss(s, s.depth_a_gt, s.depth_b_gt, s.pose_ab, opts);
        benchmark::DoNotOptimize(r.total);
    }
}
BENCHMARK(BM_evaluate_loss_baseline);

static void BM_loss_with_gradients(benchmark::State& state) {
    const auto& s = scene();
    LossOptions opts;
    EvalContext ctx = freeze_context(s, s.depth_a_gt, s.depth_b_gt, s.pose_ab, opts);
    for (auto _ : state) {
        auto r = loss_with_gradients(s, s.depth_a_gt, s.depth_b_gt, s.pose_ab, opts, ctx);
        benchmark::DoNotOptimize(r.grad_depth_a.data().data());
    }
}
BENCHMARK(BM_loss_with_gradients);

static void BM_adam_iteration(benchmark::State& state) {
    const auto& s = scene();
    OptimizerConfig cfg;
    cfg.method = OptimMethod::adam;
    cfg.max_iters = 1;
    LossOptions opts;
    DepthField init = DepthField::constant(48, 64, 5.0);
    for (auto _ : state) {
        auto r = optimize_depth(s, init, init, PoseSE3{}, cfg, opts);
        benchmark::DoNotOptimize(r.loss_history.data());
    }
}
BENCHMARK(BM_adam_iteration);

BENCHMARK_MAIN();
