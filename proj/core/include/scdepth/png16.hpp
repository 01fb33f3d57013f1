#pragma once

#include <filesystem>

#include "scdepth/grid.hpp"

namespace scdepth {

/// 16-bit grayscale PNG of a grid, min-max normalized to the full sample
/// range. The original [min, max] is recorded in a key=value sidecar at
/// path + ".range". Inspection only — the grid file is the source of truth.
void write_png16(const std::filesystem::path& path, const ScalarGrid& g);

}  // namespace scdepth
