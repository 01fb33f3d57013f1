#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "scdepth/grid_io.hpp"
#include "scdepth/png16.hpp"
#include "scdepth/rng.hpp"
#include "scdepth/run_config.hpp"
#include "scdepth/scene_io.hpp"

using namespace scdepth;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("scdepth_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

}  // namespace

TEST_CASE("grid io: f64 scalar round trip is bit-exact") {
    auto dir = temp_dir("grid_f64");
    Rng rng(61);
    ScalarGrid g(7, 9);
    for (auto& v : g.data()) v = rng.uniform(-1e6, 1e6) * 1.0000001;
    write_scalar_grid(dir / "g.grid", g, GridDType::f64);
    ScalarGrid h = read_scalar_grid(dir / "g.grid");
    REQUIRE(h.height() == 7);
    REQUIRE(h.width() == 9);
    CHECK(h.data() == g.data());
}

TEST_CASE("grid io: f32 round trip matches the float cast") {
    auto dir = temp_dir("grid_f32");
    Rng rng(67);
    ScalarGrid g(4, 5);
    for (auto& v : g.data()) v = rng.uniform(-10.0, 10.0);
    write_scalar_grid(dir / "g.grid", g, GridDType::f32);
    ScalarGrid h = read_scalar_grid(dir / "g.grid");
    for (size_t i = 0; i < g.size(); ++i) CHECK(h[i] == double(float(g[i])));
}

TEST_CASE("grid io: image and vec3 channel interleaving round trips") {
    auto dir = temp_dir("grid_multi");
    Rng rng(71);
    Image img = make_image(5, 6);
    for (int c = 0; c < 3; ++c)
        for (auto& v : img[c].data()) v = rng.uniform01();
    write_image(dir / "img.grid", img);
    Image img2 = read_image(dir / "img.grid");
    for (int c = 0; c < 3; ++c) CHECK(img2[c].data() == img[c].data());

    GridT<Vec3> v3(3, 4);
    for (auto& v : v3.data()) v = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    write_vec3_grid(dir / "n.grid", v3);
    GridT<Vec3> v3b = read_vec3_grid(dir / "n.grid");
    for (size_t i = 0; i < v3.size(); ++i) {
        CHECK(v3b[i].x == v3[i].x);
        CHECK(v3b[i].y == v3[i].y);
        CHECK(v3b[i].z == v3[i].z);
    }
}

TEST_CASE("grid io: corrupted files are rejected") {
    auto dir = temp_dir("grid_bad");
    ScalarGrid g(3, 3, 1.5);
    write_scalar_grid(dir / "g.grid", g);
    auto bytes = slurp(dir / "g.grid");

    SUBCASE("bad magic") {
        auto bad = bytes;
        bad[0] = 'X';
        spit(dir / "bad.grid", bad);
        CHECK_THROWS_AS(read_scalar_grid(dir / "bad.grid"), std::runtime_error);
    }
    SUBCASE("truncated payload") {
        auto bad = bytes;
        bad.resize(bad.size() - 5);
        spit(dir / "bad.grid", bad);
        CHECK_THROWS_AS(read_scalar_grid(dir / "bad.grid"), std::runtime_error);
    }
    SUBCASE("trailing bytes") {
        auto bad = bytes;
        bad.push_back(0);
        spit(dir / "bad.grid", bad);
        CHECK_THROWS_AS(read_scalar_grid(dir / "bad.grid"), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_scalar_grid(dir / "nope.grid"), std::runtime_error);
    }
}

TEST_CASE("scene io: full directory round trip") {
    auto dir = temp_dir("scene_rt");
    auto s = render_scene(SceneConfig::default_dynamic(24, 18, 73));
    write_scene(dir, s, 73);
    LoadedScene ls = read_scene(dir);
    CHECK(ls.seed == 73);
    for (int c = 0; c < 3; ++c) {
        CHECK(ls.sample.image_a[c].data() == s.image_a[c].data());
        CHECK(ls.sample.image_b[c].data() == s.image_b[c].data());
    }
    CHECK(ls.sample.depth_a_gt.data() == s.depth_a_gt.data());
    CHECK(ls.sample.depth_b_gt.data() == s.depth_b_gt.data());
    CHECK(ls.sample.dynamic_mask_a.data() == s.dynamic_mask_a.data());
    CHECK(ls.sample.pseudo_depth_a.data() == s.pseudo_depth_a.data());
    for (size_t i = 0; i < s.normals_a_gt.n.size(); ++i) {
        CHECK(ls.sample.normals_a_gt.n[i].x == s.normals_a_gt.n[i].x);
        CHECK(ls.sample.normals_a_gt.n[i].z == s.normals_a_gt.n[i].z);
    }
    CHECK(ls.sample.intrinsics.fx == s.intrinsics.fx);
    CHECK(ls.sample.intrinsics.cx == s.intrinsics.cx);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(ls.sample.pose_ab.rotation[r][c] == s.pose_ab.rotation[r][c]);
    CHECK(ls.sample.pose_ab.translation.y == s.pose_ab.translation.y);
}

TEST_CASE("scene io: missing member file is reported by name") {
    auto dir = temp_dir("scene_missing");
    auto s = render_scene(SceneConfig::default_static(16, 12, 79));
    write_scene(dir, s, 79);
    fs::remove(dir / "pseudo_depth_b.grid");
    CHECK_THROWS_WITH_AS(read_scene(dir), doctest::Contains("missing scene file"),
                         std::runtime_error);
}

TEST_CASE("config: defaults encode the published hyperparameters") {
    RunConfig cfg = RunConfig::parse_string("");
    CHECK(cfg.loss.photometric.lambda == 0.15);
    CHECK(cfg.loss.ranking.tau == 0.15);
    CHECK(cfg.loss.weights.lpm == 1.0);
    CHECK(cfg.loss.weights.lg == 0.5);
    CHECK(cfg.loss.weights.ln == 0.1);
    CHECK(cfg.loss.weights.lcdr == 0.1);
    CHECK(cfg.loss.weights.lern == 0.1);
    CHECK(cfg.loss.weights.ls == 0.0);
    CHECK(cfg.scene_preset == "dynamic");
    CHECK(cfg.eval_cap == 80.0);
    CHECK(cfg.loss.use_automask);
    CHECK(cfg.loss.detach_mask);
}

TEST_CASE("config: sections, comments, and whitespace parse") {
    RunConfig cfg = RunConfig::parse_string(
        "# run configuration\n"
        "[scene]\n"
        "preset = static   # no moving box\n"
        "width=32\n"
        "  height =  24 \n"
        "seed = 9\n"
        "\n"
        "[weights]\n"
        "lcdr = 0.25\n"
        "[optimizer]\n"
        "method = gradient_descent\n"
        "learning_rate = 0.5\n");
    CHECK(cfg.scene_preset == "static");
    CHECK(cfg.scene_width == 32);
    CHECK(cfg.scene_height == 24);
    CHECK(cfg.scene_seed == 9);
    CHECK(cfg.loss.weights.lcdr == 0.25);
    CHECK(cfg.optimizer.method == OptimMethod::gradient_descent);
    CHECK(cfg.optimizer.learning_rate == 0.5);
}

TEST_CASE("config: unknown key is rejected with key name and line number") {
    CHECK_THROWS_WITH_AS(RunConfig::parse_string("[scene]\nwdith = 32\n", "run.cfg"),
                         doctest::Contains("unknown key 'wdith'"), std::runtime_error);
    try {
        RunConfig::parse_string("[scene]\nwdith = 32\n", "run.cfg");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
    }
}

TEST_CASE("config: unknown section and malformed lines are rejected") {
    CHECK_THROWS_WITH_AS(RunConfig::parse_string("[scenes]\n"),
                         doctest::Contains("unknown section 'scenes'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(RunConfig::parse_string("[scene]\nwidth 32\n"),
                         doctest::Contains("expected key = value"), std::runtime_error);
    CHECK_THROWS_WITH_AS(RunConfig::parse_string("width = 32\n"),
                         doctest::Contains("outside any section"), std::runtime_error);
    CHECK_THROWS_WITH_AS(RunConfig::parse_string("[scene]\nwidth = abc\n"),
                         doctest::Contains("not an integer"), std::runtime_error);
}

TEST_CASE("config: invalid semantic values fail validation") {
    CHECK_THROWS(RunConfig::parse_string("[photometric]\nlambda = 1.5\n"));
    CHECK_THROWS(RunConfig::parse_string("[optimizer]\nlearning_rate = -1\n"));
    CHECK_THROWS(RunConfig::parse_string("[optimizer]\nmethod = newton\n"));
}

TEST_CASE("png16: signature, chunk layout, and range sidecar") {
    auto dir = temp_dir("png");
    ScalarGrid g(8, 8);
    for (size_t i = 0; i < g.size(); ++i) g[i] = 2.0 + double(i) * 0.125;
    write_png16(dir / "g.png", g);
    auto bytes = slurp(dir / "g.png");
    const uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    REQUIRE(bytes.size() > 8);
    for (int i = 0; i < 8; ++i) CHECK(uint8_t(bytes[i]) == sig[i]);
    // IHDR follows immediately; bit depth 16, grayscale color type 0
    CHECK(std::string(bytes.begin() + 12, bytes.begin() + 16) == "IHDR");
    CHECK(uint8_t(bytes[24]) == 16);
    CHECK(uint8_t(bytes[25]) == 0);

    auto sidecar = slurp(dir / "g.png.range");
    std::string sc(sidecar.begin(), sidecar.end());
    CHECK(sc.find("min=2") != std::string::npos);
    CHECK(sc.find("max=") != std::string::npos);
}
