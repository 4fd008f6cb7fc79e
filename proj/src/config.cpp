#include "meshfit/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "meshfit/errors.hpp"

namespace meshfit {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw IoError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw IoError("config line " + std::to_string(lineno) + ": empty key");
        }
        cfg.set(key, value);
    }
    return cfg;
}

void KeyValueConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << dump();
}

std::string KeyValueConfig::dump() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

bool KeyValueConfig::has(const std::string& key) const {
    return find(key).has_value();
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void KeyValueConfig::set_double(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    set(key, buf);
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    const auto v = find(key);
    if (!v) throw IoError("config: missing key '" + key + "'");
    return *v;
}

double KeyValueConfig::get_double(const std::string& key) const {
    const std::string s = get_string(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw IoError("");
        return v;
    } catch (const std::exception&) {
        throw IoError("config: bad numeric value for '" + key + "': " + s);
    }
}

long KeyValueConfig::get_int(const std::string& key) const {
    const std::string s = get_string(key);
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw IoError("");
        return v;
    } catch (const std::exception&) {
        throw IoError("config: bad integer value for '" + key + "': " + s);
    }
}

bool KeyValueConfig::get_bool(const std::string& key) const {
    const std::string s = get_string(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw IoError("config: bad boolean value for '" + key + "': " + s);
}

SolverConfig solver_config_from(const KeyValueConfig& cfg) {
    SolverConfig sc;
    if (cfg.has("lambda")) sc.lambda = cfg.get_double("lambda");
    if (cfg.has("sigma")) sc.sigma = cfg.get_double("sigma");
    if (cfg.has("tau")) sc.tau = cfg.get_double("tau");
    if (cfg.has("theta")) sc.theta = cfg.get_double("theta");
    if (cfg.has("max_iters")) sc.max_iters = static_cast<int>(cfg.get_int("max_iters"));
    if (cfg.has("energy_rel_tol")) sc.energy_rel_tol = cfg.get_double("energy_rel_tol");
    if (cfg.has("auto_steps")) sc.auto_steps = cfg.get_bool("auto_steps");
    return sc;
}

SceneSpec scene_spec_from(const KeyValueConfig& cfg) {
    SceneSpec spec;
    spec.width = static_cast<int>(cfg.get_int("width"));
    spec.height = static_cast<int>(cfg.get_int("height"));
    if (cfg.has("noise_sigma")) spec.noise_sigma = cfg.get_double("noise_sigma");
    if (cfg.has("outlier_frac")) spec.outlier_frac = cfg.get_double("outlier_frac");
    if (cfg.has("outlier_lo")) spec.outlier_lo = cfg.get_double("outlier_lo");
    if (cfg.has("outlier_hi")) spec.outlier_hi = cfg.get_double("outlier_hi");
    if (cfg.has("invalid_frac")) spec.invalid_frac = cfg.get_double("invalid_frac");
    if (cfg.has("landmark_spacing")) spec.landmark_spacing = cfg.get_double("landmark_spacing");
    if (cfg.has("seed")) spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));

    for (int k = 0;; ++k) {
        const std::string prefix = "plane" + std::to_string(k) + ".";
        if (!cfg.has(prefix + "region")) break;
        ScenePlane plane;
        const std::string region = cfg.get_string(prefix + "region");
        std::stringstream ss(region);
        std::string kind;
        ss >> kind;
        if (kind == "all") {
            plane.region = SceneRegion::all(spec.width, spec.height);
        } else if (kind == "rect") {
            plane.region.kind = SceneRegion::Kind::rect;
            ss >> plane.region.x0 >> plane.region.y0 >> plane.region.x1 >> plane.region.y1;
            if (!ss) throw IoError("config: bad rect region: " + region);
        } else if (kind == "halfplane") {
            plane.region.kind = SceneRegion::Kind::halfplane;
            ss >> plane.region.n1 >> plane.region.n2 >> plane.region.c;
            if (!ss) throw IoError("config: bad halfplane region: " + region);
        } else {
            throw IoError("config: unknown region kind: " + region);
        }
        plane.a = cfg.has(prefix + "a") ? cfg.get_double(prefix + "a") : 0.0;
        plane.b = cfg.has(prefix + "b") ? cfg.get_double(prefix + "b") : 0.0;
        plane.c = cfg.has(prefix + "c") ? cfg.get_double(prefix + "c") : 0.0;
        plane.qa = cfg.has(prefix + "qa") ? cfg.get_double(prefix + "qa") : 0.0;
        plane.qb = cfg.has(prefix + "qb") ? cfg.get_double(prefix + "qb") : 0.0;
        plane.qc = cfg.has(prefix + "qc") ? cfg.get_double(prefix + "qc") : 0.0;
        spec.planes.push_back(plane);
    }
    return spec;
}

Intrinsics intrinsics_from(const KeyValueConfig& cfg, int width, int height) {
    Intrinsics k;
    const double f = static_cast<double>(std::max(width, height));
    k.fx = cfg.has("fx") ? cfg.get_double("fx") : f;
    k.fy = cfg.has("fy") ? cfg.get_double("fy") : f;
    k.cx = cfg.has("cx") ? cfg.get_double("cx") : 0.5 * (width - 1);
    k.cy = cfg.has("cy") ? cfg.get_double("cy") : 0.5 * (height - 1);
    return k;
}

} // namespace meshfit
