#include "scdepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace scdepth {

namespace {

constexpr double kLogFloor = 1e-3;  // prediction floor before log metrics

double median(std::vector<double>& v) {
    if (v.empty()) throw std::domain_error("median of empty set");
    size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    double hi = v[k];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + k);
    return (lo + hi) / 2.0;
}

}  // namespace

double median_scale(const ScalarGrid& pred, const ScalarGrid& gt, const ScalarGrid& valid) {
    require_same_shape(pred, gt, "median_scale");
    std::vector<double> ps, gs;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (valid[i] == 0.0) continue;
        if (pred[i] <= 0.0 || gt[i] <= 0.0)
            throw std::domain_error("median_scale: non-positive depth on valid set");
        ps.push_back(pred[i]);
        gs.push_back(gt[i]);
    }
    if (ps.empty()) throw std::domain_error("median_scale: empty valid set");
    return median(gs) / median(ps);
}

MetricReport depth_metrics(const ScalarGrid& pred, const ScalarGrid& gt, const ScalarGrid& valid,
                           double cap, double scale) {
    require_same_shape(pred, gt, "depth_metrics");
    MetricReport r;
    r.scale_applied = scale;
    double sum_abs = 0, sum_sq = 0, sum_rms = 0, sum_log = 0;
    size_t d1 = 0, d2 = 0, d3 = 0, n = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (valid[i] == 0.0) continue;
        double g = gt[i];
        if (g <= 0.0 || g > cap) continue;
        double p = std::max(pred[i] * scale, kLogFloor);
        double diff = p - g;
        sum_abs += std::abs(diff) / g;
        sum_sq += diff * diff / g;
        sum_rms += diff * diff;
        double ld = std::log(p) - std::log(g);
        sum_log += ld * ld;
        double ratio = std::max(p / g, g / p);
        if (ratio < 1.25) ++d1;
        if (ratio < 1.25 * 1.25) ++d2;
        if (ratio < 1.25 * 1.25 * 1.25) ++d3;
        ++n;
    }
    r.n_valid = n;
    if (n == 0) {
        r.empty = true;
        return r;
    }
    r.abs_rel = sum_abs / n;
    r.sq_rel = sum_sq / n;
    r.rms = std::sqrt(sum_rms / n);
    r.rms_log = std::sqrt(sum_log / n);
    r.delta1 = double(d1) / n;
    r.delta2 = double(d2) / n;
    r.delta3 = double(d3) / n;
    r.low_confidence = n < 10;
    return r;
}

RegionMetricReports region_metrics(const ScalarGrid& pred, const ScalarGrid& gt,
                                   const ScalarGrid& dynamic_mask, const ScalarGrid& valid,
                                   double cap) {
    require_same_shape(pred, gt, "region_metrics");
    for (double m : dynamic_mask.data())
        if (m != 0.0 && m != 1.0)
            throw std::invalid_argument("region_metrics: dynamic mask must be binary");

    // cap-filtered valid set defines the single global scale
    ScalarGrid capped_valid = valid;
    for (size_t i = 0; i < gt.size(); ++i)
        if (gt[i] <= 0.0 || gt[i] > cap) capped_valid[i] = 0.0;

    RegionMetricReports out;
    out.global_scale = median_scale(pred, gt, capped_valid);

    ScalarGrid dyn_valid = capped_valid, stat_valid = capped_valid;
    for (size_t i = 0; i < gt.size(); ++i) {
        if (dynamic_mask[i] != 0.0)
            stat_valid[i] = 0.0;
        else
            dyn_valid[i] = 0.0;
    }
    out.full = depth_metrics(pred, gt, capped_valid, cap, out.global_scale);
    out.dynamic = depth_metrics(pred, gt, dyn_valid, cap, out.global_scale);
    out.static_region = depth_metrics(pred, gt, stat_valid, cap, out.global_scale);
    if (out.full.empty) throw std::domain_error("region_metrics: cap excludes every pixel");
    return out;
}

std::string format_report(const MetricReport& r, const std::string& prefix) {
    std::ostringstream os;
    os.precision(12);
    auto line = [&](const std::string& k, double v) { os << prefix << k << "=" << v << "\n"; };
    if (r.empty) {
        os << prefix << "empty=1\n";
        return os.str();
    }
    line("abs_rel", r.abs_rel);
    line("sq_rel", r.sq_rel);
    line("rms", r.rms);
    line("rms_log", r.rms_log);
    line("delta1", r.delta1);
    line("delta2", r.delta2);
    line("delta3", r.delta3);
    os << prefix << "n_valid=" << r.n_valid << "\n";
    line("scale_applied", r.scale_applied);
    if (r.low_confidence) os << prefix << "low_confidence=1\n";
    return os.str();
}

}  // namespace scdepth
