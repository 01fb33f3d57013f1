#pragma once

#include <optional>
#include <string>

#include "scdepth/grid.hpp"

namespace scdepth {

struct MetricReport {
    double abs_rel = 0, sq_rel = 0, rms = 0, rms_log = 0;
    double delta1 = 0, delta2 = 0, delta3 = 0;
    size_t n_valid = 0;
    double scale_applied = 1.0;
    bool low_confidence = false;  // fewer than 10 valid pixels
    bool empty = false;           // no valid pixels at all
};

/// Median-matching scale s = median(gt) / median(pred) over the valid set.
/// Even counts average the two central order statistics.
double median_scale(const ScalarGrid& pred, const ScalarGrid& gt, const ScalarGrid& valid);

/// Standard depth metrics after exclusion of gt <= 0 and gt > cap. Set
/// `scale` to apply a precomputed global scale (1 = none).
MetricReport depth_metrics(const ScalarGrid& pred, const ScalarGrid& gt, const ScalarGrid& valid,
                           double cap, double scale = 1.0);

struct RegionMetricReports {
    MetricReport full, dynamic, static_region;
    double global_scale = 1.0;
};

/// One global median scale from the full valid set, then metrics per region.
RegionMetricReports region_metrics(const ScalarGrid& pred, const ScalarGrid& gt,
                                   const ScalarGrid& dynamic_mask, const ScalarGrid& valid,
                                   double cap);

std::string format_report(const MetricReport& r, const std::string& prefix);

}  // namespace scdepth
