#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "scdepth/grid.hpp"
#include "scdepth/rng.hpp"
#include "scdepth/tape.hpp"

namespace scdepth {

enum class PairProvenance { dynamic_static, global_random, edge_guided };

/// Sampled pixel-index pairs with optional ordinal labels.
struct PointPairSet {
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    std::vector<int> labels;  // {+1,-1,0}; empty until labels are assigned
    PairProvenance provenance = PairProvenance::global_random;

    size_t size() const { return pairs.size(); }

    void append(const PointPairSet& o) {
        pairs.insert(pairs.end(), o.pairs.begin(), o.pairs.end());
        labels.insert(labels.end(), o.labels.begin(), o.labels.end());
    }
};

struct RankingConfig {
    double tau = 0.15;             // ordinal tolerance band
    double dynamic_fraction = 0.2; // lowest-mask fraction treated as dynamic
    int pairs_dynamic = -1;        // -1: one partner per dynamic pixel
    int pairs_global = -1;         // -1: same count as pairs_dynamic
    uint64_t seed = 0;
    bool log_depth = false;        // rank on log-depth differences instead of raw meters

    void validate() const {
        if (tau <= 0.0) throw std::invalid_argument("ranking: tau must be positive");
        if (!(dynamic_fraction > 0.0 && dynamic_fraction < 1.0))
            throw std::invalid_argument("ranking: dynamic_fraction outside (0,1)");
    }
};

/// Rank mask values ascending; the lowest dynamic_fraction become the dynamic
/// set, everything else the static set. Each sampled dynamic pixel is paired
/// with a uniformly random static pixel, plus pairs_global whole-image pairs.
inline PointPairSet dynamic_focused_sampling(const ScalarGrid& mask, const RankingConfig& cfg) {
    cfg.validate();
    size_t n = mask.size();
    size_t n_dynamic = size_t(double(n) * cfg.dynamic_fraction);
    if (n_dynamic < 1 || n - n_dynamic < 1)
        throw std::invalid_argument("dynamic_focused_sampling: image too small for both sets");

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    // ties broken by pixel index for determinism
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return mask[a] < mask[b]; });

    std::vector<uint32_t> dynamic_set(order.begin(), order.begin() + n_dynamic);
    std::vector<uint32_t> static_set(order.begin() + n_dynamic, order.end());

    Rng rng(cfg.seed);
    PointPairSet out;
    out.provenance = PairProvenance::dynamic_static;
    size_t pairs_dynamic = cfg.pairs_dynamic < 0 ? dynamic_set.size() : size_t(cfg.pairs_dynamic);
    for (size_t i = 0; i < pairs_dynamic; ++i) {
        uint32_t d = dynamic_set[i % dynamic_set.size()];
        uint32_t s = static_set[rng.uniform(static_set.size())];
        out.pairs.emplace_back(d, s);
    }
    size_t pairs_global = cfg.pairs_global < 0 ? pairs_dynamic : size_t(cfg.pairs_global);
    for (size_t i = 0; i < pairs_global; ++i) {
        uint32_t p0 = uint32_t(rng.uniform(n));
        uint32_t p1 = uint32_t(rng.uniform(n));
        out.pairs.emplace_back(p0, p1);
    }
    return out;
}

/// Ordinal label from a pseudo-depth pair: +1 if pd0/pd1 >= 1+tau,
/// -1 if pd0/pd1 <= 1/(1+tau), else 0.
inline int ordinal_label(double pd0, double pd1, double tau) {
    if (pd0 <= 0.0 || pd1 <= 0.0)
        throw std::domain_error("ordinal_label: non-positive pseudo-depth");
    double ratio = pd0 / pd1;
    if (ratio >= 1.0 + tau) return 1;
    if (ratio <= 1.0 / (1.0 + tau)) return -1;
    return 0;
}

/// Ranking loss of Chen et al.: softplus for labeled pairs, squared
/// difference inside the tolerance band.
template <typename T>
T ranking_loss_original(const T& p0, const T& p1, int label) {
    if (label == 0) {
        T d = p0 - p1;
        return d * d;
    }
    using scdepth::softplus;
    return softplus(-double(label) * (p0 - p1));
}

// double overload: -label*(p0-p1) is already double
inline double ranking_loss_original(double p0, double p1, int label) {
    if (label == 0) {
        double d = p0 - p1;
        return d * d;
    }
    return softplus(-double(label) * (p0 - p1));
}

template <typename T>
struct CdrResult {
    T loss;
    size_t pairs_used = 0;   // |Omega|
    bool empty = false;      // no pair survived the confidence band
};

/// Confident depth ranking loss: labels induced from pseudo-depth, pairs with
/// label 0 dropped, softplus ranking averaged over the survivors.
template <typename T>
CdrResult<T> cdr_loss(const GridT<T>& predicted, const ScalarGrid& pseudo_depth,
                      const PointPairSet& pairs, const RankingConfig& cfg) {
    cfg.validate();
    T sum(0.0);
    size_t used = 0;
    for (const auto& [i0, i1] : pairs.pairs) {
        int label = ordinal_label(pseudo_depth[i0], pseudo_depth[i1], cfg.tau);
        if (label == 0) continue;
        T p0 = predicted[i0], p1 = predicted[i1];
        if (cfg.log_depth) {
            using scdepth::log;
            using std::log;
            p0 = log(p0);
            p1 = log(p1);
        }
        using scdepth::softplus;
        T neg = (p1 - p0) * double(label);  // = -label*(p0-p1)
        sum = sum + softplus(neg);
        ++used;
    }
    if (used == 0) return {T(0.0), 0, true};
    return {sum / double(used), used, false};
}

}  // namespace scdepth
