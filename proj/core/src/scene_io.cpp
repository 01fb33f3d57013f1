#include "scdepth/scene_io.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "scdepth/grid_io.hpp"

namespace scdepth {

namespace {

std::filesystem::path grid_path(const std::filesystem::path& dir, const std::string& name) {
    return dir / (name + ".grid");
}

void require_exists(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p))
        throw std::runtime_error("missing scene file: " + p.string());
}

}  // namespace

void write_scene(const std::filesystem::path& dir, const SceneSample& sample, uint64_t seed) {
    std::filesystem::create_directories(dir);
    write_image(grid_path(dir, "image_a"), sample.image_a);
    write_image(grid_path(dir, "image_b"), sample.image_b);
    write_scalar_grid(grid_path(dir, "depth_a_gt"), sample.depth_a_gt);
    write_scalar_grid(grid_path(dir, "depth_b_gt"), sample.depth_b_gt);
    write_scalar_grid(grid_path(dir, "dynamic_mask_a"), sample.dynamic_mask_a);
    write_scalar_grid(grid_path(dir, "dynamic_mask_b"), sample.dynamic_mask_b);
    write_scalar_grid(grid_path(dir, "pseudo_depth_a"), sample.pseudo_depth_a);
    write_scalar_grid(grid_path(dir, "pseudo_depth_b"), sample.pseudo_depth_b);
    write_vec3_grid(grid_path(dir, "normals_a_gt"), sample.normals_a_gt.n);

    std::ofstream os(dir / "manifest.txt");
    if (!os) throw std::runtime_error("cannot write manifest in " + dir.string());
    os.precision(17);
    const char* names[] = {"image_a", "image_b", "depth_a_gt", "depth_b_gt",
                           "dynamic_mask_a", "dynamic_mask_b", "pseudo_depth_a",
                           "pseudo_depth_b", "normals_a_gt"};
    for (const char* n : names) os << "file." << n << "=" << n << ".grid\n";
    const CameraIntrinsics& K = sample.intrinsics;
    os << "intrinsics.fx=" << K.fx << "\nintrinsics.fy=" << K.fy << "\nintrinsics.cx=" << K.cx
       << "\nintrinsics.cy=" << K.cy << "\nintrinsics.width=" << K.width
       << "\nintrinsics.height=" << K.height << "\n";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            os << "pose.r" << r << c << "=" << sample.pose_ab.rotation[r][c] << "\n";
    os << "pose.tx=" << sample.pose_ab.translation.x << "\npose.ty="
       << sample.pose_ab.translation.y << "\npose.tz=" << sample.pose_ab.translation.z << "\n";
    os << "seed=" << seed << "\n";
    if (!os) throw std::runtime_error("manifest write failed in " + dir.string());
}

LoadedScene read_scene(const std::filesystem::path& dir) {
    std::filesystem::path mpath = dir / "manifest.txt";
    require_exists(mpath);
    std::ifstream is(mpath);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     " is not key=value: " + mpath.string());
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto want = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::runtime_error("manifest missing key '" + key + "': " + mpath.string());
        return it->second;
    };
    auto want_d = [&](const std::string& key) { return std::stod(want(key)); };

    auto file_of = [&](const std::string& name) {
        std::filesystem::path p = dir / want("file." + name);
        require_exists(p);
        return p;
    };

    LoadedScene out;
    SceneSample& s = out.sample;
    s.image_a = read_image(file_of("image_a"));
    s.image_b = read_image(file_of("image_b"));
    s.depth_a_gt = read_scalar_grid(file_of("depth_a_gt"));
    s.depth_b_gt = read_scalar_grid(file_of("depth_b_gt"));
    s.dynamic_mask_a = read_scalar_grid(file_of("dynamic_mask_a"));
    s.dynamic_mask_b = read_scalar_grid(file_of("dynamic_mask_b"));
    s.pseudo_depth_a = read_scalar_grid(file_of("pseudo_depth_a"));
    s.pseudo_depth_b = read_scalar_grid(file_of("pseudo_depth_b"));
    s.normals_a_gt.n = read_vec3_grid(file_of("normals_a_gt"));
    s.normals_a_gt.degenerate =
        ScalarGrid(s.normals_a_gt.n.height(), s.normals_a_gt.n.width(), 0.0);

    s.intrinsics.fx = want_d("intrinsics.fx");
    s.intrinsics.fy = want_d("intrinsics.fy");
    s.intrinsics.cx = want_d("intrinsics.cx");
    s.intrinsics.cy = want_d("intrinsics.cy");
    s.intrinsics.width = int(want_d("intrinsics.width"));
    s.intrinsics.height = int(want_d("intrinsics.height"));
    s.intrinsics.validate();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            s.pose_ab.rotation[r][c] =
                want_d("pose.r" + std::to_string(r) + std::to_string(c));
    s.pose_ab.translation = Vec3{want_d("pose.tx"), want_d("pose.ty"), want_d("pose.tz")};
    s.pose_ab.validate();
    out.seed = std::stoull(want("seed"));
    return out;
}

}  // namespace scdepth
