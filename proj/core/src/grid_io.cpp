#include "scdepth/grid_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "grid file I/O assumes a little-endian host");

namespace scdepth {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'D', 'G'};
constexpr uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated grid file: " + path.string());
    return v;
}

}  // namespace

void write_grid_file(const std::filesystem::path& path, const GridData& g) {
    if (g.height < 1 || g.width < 1 || g.channels < 1)
        throw std::invalid_argument("write_grid_file: non-positive dimensions");
    if (g.values.size() != g.expected_count())
        throw std::invalid_argument("write_grid_file: payload size mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os.write(kMagic, 4);
    put<uint16_t>(os, kVersion);
    put<uint16_t>(os, uint16_t(g.dtype));
    put<uint32_t>(os, uint32_t(g.height));
    put<uint32_t>(os, uint32_t(g.width));
    put<uint16_t>(os, uint16_t(g.channels));
    if (g.dtype == GridDType::f64) {
        os.write(reinterpret_cast<const char*>(g.values.data()),
                 std::streamsize(g.values.size() * sizeof(double)));
    } else {
        std::vector<float> f(g.values.begin(), g.values.end());
        os.write(reinterpret_cast<const char*>(f.data()),
                 std::streamsize(f.size() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

GridData read_grid_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open grid file: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad magic in grid file: " + path.string());
    uint16_t version = get<uint16_t>(is, path);
    if (version != kVersion)
        throw std::runtime_error("unsupported grid file version " + std::to_string(version) +
                                 ": " + path.string());
    uint16_t dtype = get<uint16_t>(is, path);
    if (dtype > 1) throw std::runtime_error("unknown dtype in grid file: " + path.string());
    GridData g;
    g.dtype = GridDType(dtype);
    g.height = int(get<uint32_t>(is, path));
    g.width = int(get<uint32_t>(is, path));
    g.channels = int(get<uint16_t>(is, path));
    if (g.height < 1 || g.width < 1 || g.channels < 1)
        throw std::runtime_error("bad dimensions in grid file: " + path.string());
    size_t n = g.expected_count();
    g.values.resize(n);
    if (g.dtype == GridDType::f64) {
        is.read(reinterpret_cast<char*>(g.values.data()), std::streamsize(n * sizeof(double)));
        if (!is) throw std::runtime_error("truncated grid file: " + path.string());
    } else {
        std::vector<float> f(n);
        is.read(reinterpret_cast<char*>(f.data()), std::streamsize(n * sizeof(float)));
        if (!is) throw std::runtime_error("truncated grid file: " + path.string());
        std::copy(f.begin(), f.end(), g.values.begin());
    }
    if (is.peek() != std::char_traits<char>::eof())
        throw std::runtime_error("trailing bytes in grid file: " + path.string());
    return g;
}

void write_scalar_grid(const std::filesystem::path& path, const ScalarGrid& g, GridDType dtype) {
    GridData d;
    d.height = g.height();
    d.width = g.width();
    d.channels = 1;
    d.dtype = dtype;
    d.values = g.data();
    write_grid_file(path, d);
}

ScalarGrid read_scalar_grid(const std::filesystem::path& path) {
    GridData d = read_grid_file(path);
    if (d.channels != 1)
        throw std::runtime_error("expected 1-channel grid: " + path.string());
    ScalarGrid g(d.height, d.width);
    std::copy(d.values.begin(), d.values.end(), g.data().begin());
    return g;
}

void write_image(const std::filesystem::path& path, const Image& img, GridDType dtype) {
    GridData d;
    d.height = img[0].height();
    d.width = img[0].width();
    d.channels = 3;
    d.dtype = dtype;
    d.values.resize(d.expected_count());
    for (size_t i = 0; i < img[0].size(); ++i)
        for (int c = 0; c < 3; ++c) d.values[i * 3 + c] = img[c][i];
    write_grid_file(path, d);
}

Image read_image(const std::filesystem::path& path) {
    GridData d = read_grid_file(path);
    if (d.channels != 3)
        throw std::runtime_error("expected 3-channel grid: " + path.string());
    Image img = make_image(d.height, d.width);
    for (size_t i = 0; i < img[0].size(); ++i)
        for (int c = 0; c < 3; ++c) img[c][i] = d.values[i * 3 + c];
    return img;
}

void write_vec3_grid(const std::filesystem::path& path, const GridT<Vec3>& g, GridDType dtype) {
    GridData d;
    d.height = g.height();
    d.width = g.width();
    d.channels = 3;
    d.dtype = dtype;
    d.values.resize(d.expected_count());
    for (size_t i = 0; i < g.size(); ++i) {
        d.values[i * 3 + 0] = g[i].x;
        d.values[i * 3 + 1] = g[i].y;
        d.values[i * 3 + 2] = g[i].z;
    }
    write_grid_file(path, d);
}

GridT<Vec3> read_vec3_grid(const std::filesystem::path& path) {
    GridData d = read_grid_file(path);
    if (d.channels != 3)
        throw std::runtime_error("expected 3-channel grid: " + path.string());
    GridT<Vec3> g(d.height, d.width);
    for (size_t i = 0; i < g.size(); ++i)
        g[i] = Vec3{d.values[i * 3 + 0], d.values[i * 3 + 1], d.values[i * 3 + 2]};
    return g;
}

}  // namespace scdepth
