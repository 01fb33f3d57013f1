#pragma once

#include <optional>

#include "scdepth/loss_report.hpp"
#include "scdepth/normals.hpp"
#include "scdepth/ranking.hpp"
#include "scdepth/selfsup.hpp"
#include "scdepth/synthetic.hpp"

namespace scdepth {

/// Per-term weights of the training objective. A zero weight disables the
/// term entirely.
struct TermWeights {
    double lp = 0.0;    // unmasked photometric (diagnostic / gradcheck)
    double lpm = 1.0;   // masked photometric
    double lg = 0.5;    // geometry consistency
    double ls = 0.0;    // edge-aware smoothness
    double ln = 0.1;    // normal matching
    double lcdr = 0.1;  // confident depth ranking
    double lern = 0.1;  // edge-aware relative normal

    /// Baseline self-supervised objective: photometric + geometry + smoothness.
    static TermWeights baseline() { return {0.0, 1.0, 0.5, 0.1, 0.0, 0.0, 0.0}; }
    /// Full objective: smoothness replaced by the pseudo-depth terms.
    static TermWeights full() { return {0.0, 1.0, 0.5, 0.0, 0.1, 0.1, 0.1}; }
    /// Single-term selector, for gradient checking.
    static TermWeights only(const std::string& term);

    void validate() const {
        for (double w : {lp, lpm, lg, ls, ln, lcdr, lern})
            if (w < 0.0) throw std::invalid_argument("term weights must be nonnegative");
    }
};

struct LossOptions {
    PhotometricConfig photometric;
    RankingConfig ranking;
    EdgeSamplingConfig edge;       // n_pairs <= 0 picks a size-based default
    TermWeights weights = TermWeights::full();
    bool use_automask = true;
    bool detach_mask = true;       // false: gradient flows through M_s in L_P^M
};

/// Discrete decisions frozen at an evaluation point: the self-discovered
/// mask, valid sets, automask, sampled pair sets, and pseudo-depth normals.
/// Gradient evaluation and finite differencing both run against one frozen
/// context so they differentiate the same smooth function.
struct EvalContext {
    ScalarGrid valid;        // warp validity at the evaluation point
    ScalarGrid valid_phot;   // valid intersected with the automask
    ScalarGrid mask;         // M_s values
    ScalarGrid automask;
    PointPairSet drr_pairs;
    PointPairSet edge_pairs;
    NormalGrid pseudo_normals;
    std::vector<std::string> warnings;
};

EvalContext freeze_context(const SceneSample& sample, const ScalarGrid& depth_a,
                           const ScalarGrid& depth_b, const PoseSE3& pose,
                           const LossOptions& opts);

/// Loss at a point, per-term breakdown only (no gradients).
LossReport evaluate_loss(const SceneSample& sample, const ScalarGrid& depth_a,
                         const ScalarGrid& depth_b, const PoseSE3& pose,
                         const LossOptions& opts);

/// Loss at a point under a given frozen context; this is the smooth function
/// that loss_with_gradients differentiates.
LossReport evaluate_loss(const SceneSample& sample, const ScalarGrid& depth_a,
                         const ScalarGrid& depth_b, const PoseSE3& pose,
                         const LossOptions& opts, const EvalContext& ctx);

/// Loss plus exact gradients w.r.t. every depth pixel (dL/dD) and the 6 pose
/// parameters (axis-angle perturbation about the given pose, translation
/// offset). Throws on any non-finite term or gradient.
LossReport loss_with_gradients(const SceneSample& sample, const ScalarGrid& depth_a,
                               const ScalarGrid& depth_b, const PoseSE3& pose,
                               const LossOptions& opts);
LossReport loss_with_gradients(const SceneSample& sample, const ScalarGrid& depth_a,
                               const ScalarGrid& depth_b, const PoseSE3& pose,
                               const LossOptions& opts, const EvalContext& ctx);

/// Same evaluation with the pose perturbed by (axis-angle w, translation u)
/// in the parameterization the pose gradient refers to. Used by finite
/// differencing and the optimizer.
PoseSE3 perturb_pose(const PoseSE3& pose, const std::array<double, 6>& delta);

}  // namespace scdepth
