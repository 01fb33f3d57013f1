#include "scdepth/png16.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace scdepth {

namespace {

void put_be32(std::vector<unsigned char>& v, uint32_t x) {
    v.push_back((x >> 24) & 0xff);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back(x & 0xff);
}

void write_chunk(std::ostream& os, const char type[4], const std::vector<unsigned char>& data) {
    std::vector<unsigned char> head;
    put_be32(head, uint32_t(data.size()));
    os.write(reinterpret_cast<const char*>(head.data()), 4);
    os.write(type, 4);
    if (!data.empty()) os.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
    if (!data.empty()) crc = crc32(crc, data.data(), uInt(data.size()));
    std::vector<unsigned char> tail;
    put_be32(tail, uint32_t(crc));
    os.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

void write_png16(const std::filesystem::path& path, const ScalarGrid& g) {
    if (!all_finite(g)) throw std::invalid_argument("write_png16: non-finite values");
    double lo = g[0], hi = g[0];
    for (double v : g.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double span = hi - lo;
    int h = g.height(), w = g.width();

    // filter byte 0 per scanline, big-endian 16-bit samples
    std::vector<unsigned char> raw;
    raw.reserve(size_t(h) * (1 + size_t(w) * 2));
    for (int y = 0; y < h; ++y) {
        raw.push_back(0);
        for (int x = 0; x < w; ++x) {
            double t = span > 0.0 ? (g(y, x) - lo) / span : 0.0;
            auto s = uint16_t(std::lround(t * 65535.0));
            raw.push_back((s >> 8) & 0xff);
            raw.push_back(s & 0xff);
        }
    }

    uLongf comp_cap = compressBound(uLong(raw.size()));
    std::vector<unsigned char> comp(comp_cap);
    if (compress2(comp.data(), &comp_cap, raw.data(), uLong(raw.size()), 9) != Z_OK)
        throw std::runtime_error("write_png16: deflate failed");
    comp.resize(comp_cap);

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    os.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<unsigned char> ihdr;
    put_be32(ihdr, uint32_t(w));
    put_be32(ihdr, uint32_t(h));
    ihdr.push_back(16);  // bit depth
    ihdr.push_back(0);   // grayscale
    ihdr.push_back(0);   // deflate
    ihdr.push_back(0);   // adaptive filtering
    ihdr.push_back(0);   // no interlace
    write_chunk(os, "IHDR", ihdr);
    write_chunk(os, "IDAT", comp);
    write_chunk(os, "IEND", {});
    if (!os) throw std::runtime_error("write failed: " + path.string());

    std::ofstream side(path.string() + ".range");
    side.precision(17);
    side << "min=" << lo << "\nmax=" << hi << "\n";
    if (!side) throw std::runtime_error("sidecar write failed: " + path.string() + ".range");
}

}  // namespace scdepth
