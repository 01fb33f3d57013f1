#pragma once

#include <filesystem>
#include <string>

#include "scdepth/loss_eval.hpp"
#include "scdepth/optimize.hpp"

namespace scdepth {

// Plain-text run configuration. Grammar (see docs/config.md):
//   [section]
//   key = value        # comment
// One level of sections, '#' starts a comment, blank lines ignored.
// Unknown sections or keys are rejected with the offending name and line.
struct RunConfig {
    std::string scene_preset = "dynamic";  // dynamic | static | two_plane
    int scene_width = 64, scene_height = 48;
    uint64_t scene_seed = 0;
    double scene_noise = 0.0;

    PseudoDepthConfig pseudo;
    LossOptions loss;
    OptimizerConfig optimizer;
    double eval_cap = 80.0;

    SceneConfig scene_config() const;

    static RunConfig parse_file(const std::filesystem::path& path);
    static RunConfig parse_string(const std::string& text, const std::string& name = "<config>");
};

}  // namespace scdepth
