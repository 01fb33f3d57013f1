#include "scdepth/loss_eval.hpp"

#include <cmath>

namespace scdepth {

namespace {

int default_edge_pairs(int h, int w) { return std::max(64, h * w / 8); }

template <typename T>
GridT<T> to_tracked(const ScalarGrid& g, Tape& tape) {
    GridT<T> out(g.height(), g.width());
    for (size_t i = 0; i < g.size(); ++i) out[i] = tape.variable(g[i]);
    return out;
}

/// Exp(w) applied on the left of a base rotation, with t = t_base + u.
template <typename T>
PoseT<T> pose_from_delta(const PoseSE3& base, const std::array<T, 6>& delta) {
    std::array<std::array<T, 3>, 3> W = {{{T(0.0), T(0.0) - delta[2], delta[1]},
                                          {delta[2], T(0.0), T(0.0) - delta[0]},
                                          {T(0.0) - delta[1], delta[0], T(0.0)}}};
    T theta_sq = delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2];
    T A(0.0), B(0.0);
    rodrigues_coeffs(theta_sq, A, B);
    std::array<std::array<T, 3>, 3> W2;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            W2[i][j] = W[i][0] * W[0][j] + W[i][1] * W[1][j] + W[i][2] * W[2][j];
    std::array<std::array<T, 3>, 3> Rd;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            Rd[i][j] = (i == j ? T(1.0) : T(0.0)) + A * W[i][j] + B * W2[i][j];
    PoseT<T> out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.R[i][j] = Rd[i][0] * base.rotation[0][j] + Rd[i][1] * base.rotation[1][j] +
                          Rd[i][2] * base.rotation[2][j];
    out.t = {base.translation.x + delta[3], base.translation.y + delta[4],
             base.translation.z + delta[5]};
    return out;
}

template <typename T>
struct TermValues {
    std::map<std::string, T> terms;
    T total = T(0.0);
};

double term_weight(const TermWeights& w, const std::string& name) {
    if (name == "L_P") return w.lp;
    if (name == "L_P^M") return w.lpm;
    if (name == "L_G") return w.lg;
    if (name == "L_S") return w.ls;
    if (name == "L_N") return w.ln;
    if (name == "L_CDR") return w.lcdr;
    if (name == "L_ERN") return w.lern;
    throw std::invalid_argument("unknown loss term: " + name);
}

/// The full objective at one point. All discrete decisions come from the
/// frozen context; with T = Var this records the tape the gradients need.
template <typename T>
TermValues<T> compute_terms(const SceneSample& s, const GridT<T>& depth_a,
                            const GridT<T>& depth_b, const PoseT<T>& pose,
                            const LossOptions& opts, const EvalContext& ctx,
                            std::vector<std::string>& warnings) {
    const TermWeights& w = opts.weights;
    const CameraIntrinsics& K = s.intrinsics;
    TermValues<T> out;

    bool need_flow = w.lp > 0 || w.lpm > 0 || w.lg > 0;
    bool need_ddiff = w.lg > 0 || (w.lpm > 0 && !opts.detach_mask);
    bool need_normals = w.ln > 0 || w.lern > 0;

    std::optional<FlowFieldT<T>> flow;
    if (need_flow) flow = compute_warp(depth_a, pose, K);

    GridT<T> ddiff;
    if (need_ddiff) ddiff = depth_inconsistency_from_flow(*flow, depth_b, ctx.valid);

    if (w.lp > 0 || w.lpm > 0) {
        ImageT<T> synthesized;
        for (int c = 0; c < 3; ++c)
            synthesized[c] = bilinear_sample(s.image_b[c], flow->x, flow->y);
        auto phot = photometric_loss(s.image_a, synthesized, ctx.valid_phot, opts.photometric);
        out.terms["L_P"] = phot.scalar;
        if (w.lpm > 0) {
            if (opts.detach_mask) {
                out.terms["L_P^M"] =
                    weighted_photometric(phot.per_pixel, ctx.mask, ctx.valid_phot);
            } else {
                GridT<T> live_mask = self_mask(ddiff);
                out.terms["L_P^M"] = weighted_photometric(phot.per_pixel, live_mask, ctx.valid_phot);
            }
        }
    }

    if (w.lg > 0) out.terms["L_G"] = geometry_loss(ddiff, ctx.valid);
    if (w.ls > 0) out.terms["L_S"] = smoothness_loss(depth_a, s.image_a);

    std::optional<NormalGridT<T>> normals;
    if (need_normals) normals = normals_from_depth(depth_a, K);
    if (w.ln > 0) out.terms["L_N"] = normal_matching_loss(*normals, ctx.pseudo_normals);
    if (w.lern > 0) {
        if (ctx.edge_pairs.pairs.empty()) {
            out.terms["L_ERN"] = T(0.0);
            warnings.push_back("L_ERN: no edge pairs sampled");
        } else {
            out.terms["L_ERN"] = ern_loss(*normals, ctx.pseudo_normals, ctx.edge_pairs);
        }
    }
    if (w.lcdr > 0) {
        auto cdr = cdr_loss(depth_a, s.pseudo_depth_a, ctx.drr_pairs, opts.ranking);
        out.terms["L_CDR"] = cdr.loss;
        if (cdr.empty) warnings.push_back("L_CDR: no pair survived the confidence band");
    }

    for (const auto& [name, value] : out.terms)
        out.total = out.total + term_weight(w, name) * value;
    return out;
}

void check_finite(const LossReport& r) {
    for (const auto& [name, v] : r.per_term)
        if (!std::isfinite(v)) throw std::runtime_error("loss term " + name + " is not finite");
    if (!std::isfinite(r.total)) throw std::runtime_error("total loss is not finite");
}

}  // namespace

TermWeights TermWeights::only(const std::string& term) {
    TermWeights w{0, 0, 0, 0, 0, 0, 0};
    if (term == "L_P") w.lp = 1;
    else if (term == "L_P^M") w.lpm = 1;
    else if (term == "L_G") w.lg = 1;
    else if (term == "L_S") w.ls = 1;
    else if (term == "L_N") w.ln = 1;
    else if (term == "L_CDR") w.lcdr = 1;
    else if (term == "L_ERN") w.lern = 1;
    else throw std::invalid_argument("unknown loss term: " + term);
    return w;
}

PoseSE3 perturb_pose(const PoseSE3& pose, const std::array<double, 6>& delta) {
    PoseSE3 out;
    out.rotation = mat3_mul(axis_angle_to_matrix({delta[0], delta[1], delta[2]}), pose.rotation);
    out.translation = pose.translation + Vec3{delta[3], delta[4], delta[5]};
    return out;
}

EvalContext freeze_context(const SceneSample& s, const ScalarGrid& depth_a,
                           const ScalarGrid& depth_b, const PoseSE3& pose,
                           const LossOptions& opts) {
    opts.weights.validate();
    const TermWeights& w = opts.weights;
    const CameraIntrinsics& K = s.intrinsics;
    int h = depth_a.height(), wd = depth_a.width();
    EvalContext ctx;

    FlowField flow = compute_warp(depth_a, pose, K);
    ctx.valid = flow.valid;
    // drop pixels whose interpolated target depth is non-positive
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < wd; ++x)
            if (ctx.valid(y, x) != 0.0 &&
                bilinear_at(depth_b, flow.x(y, x), flow.y(y, x)) <= 0.0)
                ctx.valid(y, x) = 0.0;

    ScalarGrid ddiff = depth_inconsistency_from_flow(flow, depth_b, ctx.valid);
    ctx.mask = self_mask(ddiff);

    ctx.automask = ScalarGrid(h, wd, 1.0);
    ctx.valid_phot = ctx.valid;
    if (opts.use_automask && (w.lp > 0 || w.lpm > 0)) {
        ImageT<double> synthesized;
        for (int c = 0; c < 3; ++c)
            synthesized[c] = bilinear_sample(s.image_b[c], flow.x, flow.y);
        ScalarGrid all_valid(h, wd, 1.0);
        ScalarGrid warped_lp =
            photometric_loss(s.image_a, synthesized, all_valid, opts.photometric).per_pixel;
        auto mr = min_reprojection_automask(s.image_a, std::vector<ScalarGrid>{warped_lp},
                                            std::vector<Image>{s.image_b}, opts.photometric);
        ctx.automask = mr.automask;
        bool any = false;
        for (size_t i = 0; i < ctx.valid_phot.size(); ++i) {
            ctx.valid_phot[i] = ctx.valid_phot[i] * ctx.automask[i];
            any = any || ctx.valid_phot[i] != 0.0;
        }
        if (!any) {
            ctx.valid_phot = ctx.valid;
            ctx.warnings.push_back("automask removed every valid pixel; falling back to V");
        }
    }

    if (w.lcdr > 0) ctx.drr_pairs = dynamic_focused_sampling(ctx.mask, opts.ranking);
    if (w.lern > 0) {
        EdgeSamplingConfig ec = opts.edge;
        if (ec.n_pairs <= 0) ec.n_pairs = default_edge_pairs(h, wd);
        auto es = edge_guided_sampling(s.image_a, ec);
        ctx.edge_pairs = std::move(es.pairs);
        if (es.empty_warning) ctx.warnings.push_back("edge sampling found no edges");
    }
    if (w.ln > 0 || w.lern > 0) ctx.pseudo_normals = normals_from_depth(s.pseudo_depth_a, K);
    return ctx;
}

LossReport evaluate_loss(const SceneSample& s, const ScalarGrid& depth_a,
                         const ScalarGrid& depth_b, const PoseSE3& pose, const LossOptions& opts,
                         const EvalContext& ctx) {
    LossReport r;
    r.warnings = ctx.warnings;
    PoseT<double> pt = to_pose_t(pose);
    auto tv = compute_terms<double>(s, depth_a, depth_b, pt, opts, ctx, r.warnings);
    for (const auto& [name, v] : tv.terms) {
        r.per_term[name] = v;
        r.weights[name] = term_weight(opts.weights, name);
    }
    r.total = tv.total;
    check_finite(r);
    return r;
}

LossReport evaluate_loss(const SceneSample& s, const ScalarGrid& depth_a,
                         const ScalarGrid& depth_b, const PoseSE3& pose, const LossOptions& opts) {
    EvalContext ctx = freeze_context(s, depth_a, depth_b, pose, opts);
    return evaluate_loss(s, depth_a, depth_b, pose, opts, ctx);
}

LossReport loss_with_gradients(const SceneSample& s, const ScalarGrid& depth_a,
                               const ScalarGrid& depth_b, const PoseSE3& pose,
                               const LossOptions& opts, const EvalContext& ctx) {
    Tape tape;
    Tape::Scope scope(tape);
    GridT<Var> da = to_tracked<Var>(depth_a, tape);
    GridT<Var> db = to_tracked<Var>(depth_b, tape);
    std::array<Var, 6> delta;
    for (auto& d : delta) d = tape.variable(0.0);
    PoseT<Var> pv = pose_from_delta(pose, delta);

    LossReport r;
    r.warnings = ctx.warnings;
    auto tv = compute_terms<Var>(s, da, db, pv, opts, ctx, r.warnings);
    for (const auto& [name, v] : tv.terms) {
        r.per_term[name] = value_of(v);
        r.weights[name] = term_weight(opts.weights, name);
    }
    r.total = value_of(tv.total);
    check_finite(r);

    std::vector<double> adj = tape.gradient(tv.total);
    auto read = [&](const Var& v) { return v.is_const() ? 0.0 : adj[v.idx]; };
    r.grad_depth_a = ScalarGrid(depth_a.height(), depth_a.width());
    r.grad_depth_b = ScalarGrid(depth_b.height(), depth_b.width());
    for (size_t i = 0; i < da.size(); ++i) r.grad_depth_a[i] = read(da[i]);
    for (size_t i = 0; i < db.size(); ++i) r.grad_depth_b[i] = read(db[i]);
    for (int i = 0; i < 6; ++i) r.grad_pose[i] = read(delta[i]);
    r.has_gradients = true;

    for (double g : r.grad_depth_a.data())
        if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient w.r.t. depth_a");
    for (double g : r.grad_depth_b.data())
        if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient w.r.t. depth_b");
    for (double g : r.grad_pose)
        if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient w.r.t. pose");
    return r;
}

LossReport loss_with_gradients(const SceneSample& s, const ScalarGrid& depth_a,
                               const ScalarGrid& depth_b, const PoseSE3& pose,
                               const LossOptions& opts) {
    EvalContext ctx = freeze_context(s, depth_a, depth_b, pose, opts);
    return loss_with_gradients(s, depth_a, depth_b, pose, opts, ctx);
}

}  // namespace scdepth
