#include "scdepth/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace scdepth {

DepthField DepthField::from_depth(const ScalarGrid& depth, double d_min, double d_max) {
    DepthField f;
    f.d_min = d_min;
    f.d_max = d_max;
    f.inv_depth = ScalarGrid(depth.height(), depth.width());
    for (size_t i = 0; i < depth.size(); ++i) {
        if (depth[i] <= 0.0) throw std::domain_error("DepthField: non-positive depth");
        f.inv_depth[i] = 1.0 / depth[i];
    }
    f.clamp();
    return f;
}

DepthField DepthField::constant(int h, int w, double depth, double d_min, double d_max) {
    return from_depth(ScalarGrid(h, w, depth), d_min, d_max);
}

ScalarGrid DepthField::depth() const {
    ScalarGrid d(inv_depth.height(), inv_depth.width());
    for (size_t i = 0; i < d.size(); ++i) d[i] = 1.0 / inv_depth[i];
    return d;
}

void DepthField::clamp() {
    double lo = 1.0 / d_max, hi = 1.0 / d_min;
    for (auto& x : inv_depth.data()) x = std::clamp(x, lo, hi);
}

double finite_diff_check(const std::function<double(const std::vector<double>&)>& f,
                         const std::vector<double>& point,
                         const std::vector<double>& analytic_grad, double step) {
    if (point.size() != analytic_grad.size())
        throw std::invalid_argument("finite_diff_check: size mismatch");
    double max_rel = 0.0;
    std::vector<double> x = point;
    for (size_t i = 0; i < x.size(); ++i) {
        double x0 = x[i];
        x[i] = x0 + step;
        double fp = f(x);
        x[i] = x0 - step;
        double fm = f(x);
        x[i] = x0;
        double numeric = (fp - fm) / (2.0 * step);
        double denom = std::max({std::abs(analytic_grad[i]), std::abs(numeric), 1e-12});
        max_rel = std::max(max_rel, std::abs(analytic_grad[i] - numeric) / denom);
    }
    return max_rel;
}

namespace {

struct State {
    DepthField a, b;
    PoseSE3 pose;
};

// chain dL/dD -> dL/dx for x = 1/D (dD/dx = -1/x^2 = -D^2)
void chain_to_inverse(const ScalarGrid& grad_depth, const DepthField& field, ScalarGrid& out) {
    for (size_t i = 0; i < grad_depth.size(); ++i) {
        double d = 1.0 / field.inv_depth[i];
        out[i] = -grad_depth[i] * d * d;
    }
}

struct AdamState {
    std::vector<double> m, v;
    int t = 0;
};

void adam_step(AdamState& st, std::vector<double>& x, const std::vector<double>& g, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (st.m.empty()) {
        st.m.assign(x.size(), 0.0);
        st.v.assign(x.size(), 0.0);
    }
    ++st.t;
    double c1 = 1.0 - std::pow(b1, st.t), c2 = 1.0 - std::pow(b2, st.t);
    for (size_t i = 0; i < x.size(); ++i) {
        st.m[i] = b1 * st.m[i] + (1 - b1) * g[i];
        st.v[i] = b2 * st.v[i] + (1 - b2) * g[i] * g[i];
        x[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
    }
}

}  // namespace

OptimizeResult optimize_depth(const SceneSample& sample, const DepthField& init_a,
                              const DepthField& init_b, const PoseSE3& init_pose,
                              const OptimizerConfig& cfg, const LossOptions& opts) {
    cfg.validate();
    State st{init_a, init_b, init_pose};
    st.a.clamp();
    st.b.clamp();
    size_t na = st.a.inv_depth.size(), nb = st.b.inv_depth.size();

    OptimizeResult result;
    AdamState adam;
    bool frozen = cfg.method == OptimMethod::gradient_descent;
    std::optional<EvalContext> fixed_ctx;

    auto eval_ctx = [&](const State& s, uint64_t iter) {
        LossOptions o = opts;
        if (!frozen) o.ranking.seed = Rng::hash(cfg.seed, iter);
        return freeze_context(sample, s.a.depth(), s.b.depth(), s.pose, o);
    };

    double prev_loss = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        if (frozen && !fixed_ctx) fixed_ctx = eval_ctx(st, 0);
        EvalContext ctx = frozen ? *fixed_ctx : eval_ctx(st, uint64_t(iter));

        ScalarGrid da = st.a.depth(), db = st.b.depth();
        LossReport rep = loss_with_gradients(sample, da, db, st.pose, opts, ctx);
        if (!std::isfinite(rep.total) || rep.total > 1e6)
            throw std::runtime_error("optimize_depth: divergence at iteration " +
                                     std::to_string(iter));

        // gradient in optimization coordinates
        ScalarGrid gxa(da.height(), da.width()), gxb(db.height(), db.width());
        chain_to_inverse(rep.grad_depth_a, st.a, gxa);
        chain_to_inverse(rep.grad_depth_b, st.b, gxb);

        size_t npose = cfg.optimize_pose ? 6 : 0;
        std::vector<double> x(na + nb + npose), g(na + nb + npose);
        std::copy(st.a.inv_depth.data().begin(), st.a.inv_depth.data().end(), x.begin());
        std::copy(st.b.inv_depth.data().begin(), st.b.inv_depth.data().end(), x.begin() + na);
        std::copy(gxa.data().begin(), gxa.data().end(), g.begin());
        std::copy(gxb.data().begin(), gxb.data().end(), g.begin() + na);
        for (size_t i = 0; i < npose; ++i) {
            x[na + nb + i] = 0.0;  // local pose coordinates about the current estimate
            g[na + nb + i] = rep.grad_pose[i];
        }

        auto apply = [&](const std::vector<double>& xv) {
            State s = st;
            std::copy(xv.begin(), xv.begin() + na, s.a.inv_depth.data().begin());
            std::copy(xv.begin() + na, xv.begin() + na + nb, s.b.inv_depth.data().begin());
            s.a.clamp();
            s.b.clamp();
            if (npose) {
                std::array<double, 6> d;
                std::copy(xv.begin() + na + nb, xv.end(), d.begin());
                s.pose = perturb_pose(st.pose, d);
            }
            return s;
        };

        double accepted_loss;
        if (cfg.method == OptimMethod::gradient_descent) {
            // backtracking line search on the frozen-context objective
            double step = cfg.learning_rate;
            double base = rep.total;
            accepted_loss = base;
            State best = st;
            for (int ls = 0; ls < 30; ++ls) {
                std::vector<double> xc = x;
                for (size_t i = 0; i < xc.size(); ++i) xc[i] -= step * g[i];
                State cand = apply(xc);
                double cl = evaluate_loss(sample, cand.a.depth(), cand.b.depth(), cand.pose,
                                          opts, ctx).total;
                if (cl < base) {
                    best = cand;
                    accepted_loss = cl;
                    break;
                }
                step *= 0.5;
            }
            st = best;
        } else {
            adam_step(adam, x, g, cfg.learning_rate);
            st = apply(x);
            accepted_loss = rep.total;
        }

        result.loss_history.push_back(accepted_loss);
        result.iterations = iter + 1;
        if (cfg.convergence_tol > 0.0 && std::isfinite(prev_loss)) {
            double rel = std::abs(prev_loss - accepted_loss) / std::max(std::abs(prev_loss), 1e-12);
            if (rel < cfg.convergence_tol) {
                result.converged = true;
                break;
            }
        }
        prev_loss = accepted_loss;
    }

    result.depth_a = st.a;
    result.depth_b = st.b;
    result.pose = st.pose;
    return result;
}

}  // namespace scdepth
