#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "scdepth/camera.hpp"
#include "scdepth/grid.hpp"

namespace scdepth {

// Binary grid container: magic "SCDG", then little-endian u16 version,
// u16 dtype (0 = f32, 1 = f64), u32 height, u32 width, u16 channels,
// followed by height*width*channels row-major samples (channel-interleaved).
enum class GridDType : uint16_t { f32 = 0, f64 = 1 };

struct GridData {
    int height = 0, width = 0, channels = 1;
    GridDType dtype = GridDType::f64;
    std::vector<double> values;  // row-major, channel-interleaved

    size_t expected_count() const {
        return size_t(height) * size_t(width) * size_t(channels);
    }
};

void write_grid_file(const std::filesystem::path& path, const GridData& g);
GridData read_grid_file(const std::filesystem::path& path);

void write_scalar_grid(const std::filesystem::path& path, const ScalarGrid& g,
                       GridDType dtype = GridDType::f64);
ScalarGrid read_scalar_grid(const std::filesystem::path& path);

void write_image(const std::filesystem::path& path, const Image& img,
                 GridDType dtype = GridDType::f64);
Image read_image(const std::filesystem::path& path);

void write_vec3_grid(const std::filesystem::path& path, const GridT<Vec3>& g,
                     GridDType dtype = GridDType::f64);
GridT<Vec3> read_vec3_grid(const std::filesystem::path& path);

}  // namespace scdepth
