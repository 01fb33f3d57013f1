#pragma once

#include <functional>
#include <vector>

#include "scdepth/loss_eval.hpp"

namespace scdepth {

/// Per-pixel inverse-depth variables with realized depth clamped to
/// [d_min, d_max].
struct DepthField {
    ScalarGrid inv_depth;
    double d_min = 0.1, d_max = 100.0;

    static DepthField from_depth(const ScalarGrid& depth, double d_min = 0.1,
                                 double d_max = 100.0);
    static DepthField constant(int h, int w, double depth, double d_min = 0.1,
                               double d_max = 100.0);

    ScalarGrid depth() const;
    void clamp();
};

enum class OptimMethod { gradient_descent, adam };

struct OptimizerConfig {
    OptimMethod method = OptimMethod::adam;
    double learning_rate = 1e-2;   // direct depth fields need larger steps than
                                   // the 1e-4 used for network weights
    int max_iters = 500;
    double convergence_tol = 0.0;  // relative loss change; 0 disables
    uint64_t seed = 0;
    bool optimize_pose = true;

    void validate() const {
        if (learning_rate <= 0.0) throw std::invalid_argument("optimizer: learning rate must be positive");
        if (max_iters < 1) throw std::invalid_argument("optimizer: max_iters must be >= 1");
    }
};

/// Central-difference check of an analytic gradient. Returns the max relative
/// error, with denominator max(|analytic|, |numeric|, 1e-12).
double finite_diff_check(const std::function<double(const std::vector<double>&)>& f,
                         const std::vector<double>& point,
                         const std::vector<double>& analytic_grad, double step);

struct OptimizeResult {
    DepthField depth_a, depth_b;
    PoseSE3 pose;
    std::vector<double> loss_history;
    int iterations = 0;
    bool converged = false;
};

/// First-order fitting of the depth fields (and optionally the pose) under
/// the configured objective. gradient_descent uses backtracking line search
/// on a context frozen at initialization, so its recorded history is
/// nonincreasing; adam refreezes the evaluation context every iteration.
OptimizeResult optimize_depth(const SceneSample& sample, const DepthField& init_a,
                              const DepthField& init_b, const PoseSE3& init_pose,
                              const OptimizerConfig& cfg, const LossOptions& opts);

}  // namespace scdepth
