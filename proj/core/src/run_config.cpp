#include "scdepth/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scdepth {

namespace {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw ParseError(name + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, const std::string& name, int line) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        fail(name, line, "not a number: '" + v + "'");
    }
}

int parse_int(const std::string& v, const std::string& name, int line) {
    try {
        size_t pos = 0;
        int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return i;
    } catch (...) {
        fail(name, line, "not an integer: '" + v + "'");
    }
}

uint64_t parse_u64(const std::string& v, const std::string& name, int line) {
    try {
        size_t pos = 0;
        uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return u;
    } catch (...) {
        fail(name, line, "not an unsigned integer: '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& name, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(name, line, "not a boolean (true/false/1/0): '" + v + "'");
}

}  // namespace

SceneConfig RunConfig::scene_config() const {
    SceneConfig sc;
    if (scene_preset == "dynamic")
        sc = SceneConfig::default_dynamic(scene_width, scene_height, scene_seed);
    else if (scene_preset == "static")
        sc = SceneConfig::default_static(scene_width, scene_height, scene_seed);
    else if (scene_preset == "two_plane")
        sc = SceneConfig::two_plane(scene_width, scene_height, scene_seed);
    else
        throw std::invalid_argument("unknown scene preset: " + scene_preset);
    sc.noise = scene_noise;
    return sc;
}

RunConfig RunConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_string(buf.str(), path.string());
}

RunConfig RunConfig::parse_string(const std::string& text, const std::string& name) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(name, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            const char* known[] = {"scene", "pseudo_depth", "photometric", "ranking",
                                   "edge",  "weights",      "loss",        "optimizer",
                                   "eval"};
            bool ok = false;
            for (const char* k : known) ok = ok || section == k;
            if (!ok) fail(name, lineno, "unknown section '" + section + "'");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(name, lineno, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail(name, lineno, "empty key");
        if (section.empty()) fail(name, lineno, "key '" + key + "' outside any section");

        auto d = [&] { return parse_double(val, name, lineno); };
        auto i = [&] { return parse_int(val, name, lineno); };
        auto u = [&] { return parse_u64(val, name, lineno); };
        auto b = [&] { return parse_bool(val, name, lineno); };

        bool handled = true;
        if (section == "scene") {
            if (key == "preset") cfg.scene_preset = val;
            else if (key == "width") cfg.scene_width = i();
            else if (key == "height") cfg.scene_height = i();
            else if (key == "seed") cfg.scene_seed = u();
            else if (key == "noise") cfg.scene_noise = d();
            else handled = false;
        } else if (section == "pseudo_depth") {
            if (key == "gain") cfg.pseudo.gain = d();
            else if (key == "exponent") cfg.pseudo.exponent = d();
            else if (key == "offset") cfg.pseudo.offset = d();
            else if (key == "smoothing_radius") cfg.pseudo.smoothing_radius = i();
            else if (key == "audit_tau") cfg.pseudo.audit_tau = d();
            else if (key == "seed") cfg.pseudo.seed = u();
            else handled = false;
        } else if (section == "photometric") {
            if (key == "lambda") cfg.loss.photometric.lambda = d();
            else if (key == "ssim_c1") cfg.loss.photometric.ssim_c1 = d();
            else if (key == "ssim_c2") cfg.loss.photometric.ssim_c2 = d();
            else if (key == "window") cfg.loss.photometric.window = i();
            else handled = false;
        } else if (section == "ranking") {
            if (key == "tau") cfg.loss.ranking.tau = d();
            else if (key == "dynamic_fraction") cfg.loss.ranking.dynamic_fraction = d();
            else if (key == "pairs_dynamic") cfg.loss.ranking.pairs_dynamic = i();
            else if (key == "pairs_global") cfg.loss.ranking.pairs_global = i();
            else if (key == "seed") cfg.loss.ranking.seed = u();
            else if (key == "log_depth") cfg.loss.ranking.log_depth = b();
            else handled = false;
        } else if (section == "edge") {
            if (key == "edge_percentile") cfg.loss.edge.edge_percentile = d();
            else if (key == "offset_min") cfg.loss.edge.offset_min = d();
            else if (key == "offset_max") cfg.loss.edge.offset_max = d();
            else if (key == "n_pairs") cfg.loss.edge.n_pairs = i();
            else if (key == "seed") cfg.loss.edge.seed = u();
            else handled = false;
        } else if (section == "weights") {
            if (key == "lp") cfg.loss.weights.lp = d();
            else if (key == "lpm") cfg.loss.weights.lpm = d();
            else if (key == "lg") cfg.loss.weights.lg = d();
            else if (key == "ls") cfg.loss.weights.ls = d();
            else if (key == "ln") cfg.loss.weights.ln = d();
            else if (key == "lcdr") cfg.loss.weights.lcdr = d();
            else if (key == "lern") cfg.loss.weights.lern = d();
            else handled = false;
        } else if (section == "loss") {
            if (key == "use_automask") cfg.loss.use_automask = b();
            else if (key == "detach_mask") cfg.loss.detach_mask = b();
            else handled = false;
        } else if (section == "optimizer") {
            if (key == "method") {
                if (val == "adam") cfg.optimizer.method = OptimMethod::adam;
                else if (val == "gradient_descent" || val == "gd")
                    cfg.optimizer.method = OptimMethod::gradient_descent;
                else fail(name, lineno, "unknown optimizer method '" + val + "'");
            }
            else if (key == "learning_rate") cfg.optimizer.learning_rate = d();
            else if (key == "max_iters") cfg.optimizer.max_iters = i();
            else if (key == "convergence_tol") cfg.optimizer.convergence_tol = d();
            else if (key == "seed") cfg.optimizer.seed = u();
            else if (key == "optimize_pose") cfg.optimizer.optimize_pose = b();
            else handled = false;
        } else if (section == "eval") {
            if (key == "cap") cfg.eval_cap = d();
            else handled = false;
        }
        if (!handled)
            fail(name, lineno, "unknown key '" + key + "' in section [" + section + "]");
    }
    cfg.loss.photometric.validate();
    cfg.loss.ranking.validate();
    cfg.loss.weights.validate();
    cfg.optimizer.validate();
    cfg.pseudo.validate();
    return cfg;
}

}  // namespace scdepth
