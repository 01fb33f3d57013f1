#pragma once

#include <filesystem>

#include "scdepth/synthetic.hpp"

namespace scdepth {

// A scene directory holds nine grid files plus manifest.txt. The manifest is
// line-oriented key=value and records the filenames, intrinsics, the relative
// pose a->b (row-major rotation + translation), and the generator seed.

void write_scene(const std::filesystem::path& dir, const SceneSample& sample, uint64_t seed);

struct LoadedScene {
    SceneSample sample;
    uint64_t seed = 0;
};

LoadedScene read_scene(const std::filesystem::path& dir);

}  // namespace scdepth
