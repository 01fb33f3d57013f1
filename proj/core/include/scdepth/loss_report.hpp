#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "scdepth/grid.hpp"

namespace scdepth {

/// Total loss, per-term breakdown, and gradients w.r.t. depth grids and
/// the 6 pose parameters (axis-angle perturbation + translation).
struct LossReport {
    double total = 0.0;
    std::map<std::string, double> per_term;   // unweighted term values
    std::map<std::string, double> weights;    // weight applied to each term
    ScalarGrid grad_depth_a, grad_depth_b;    // dL/dD per pixel
    std::array<double, 6> grad_pose{};
    std::vector<std::string> warnings;

    bool has_gradients = false;
};

}  // namespace scdepth
