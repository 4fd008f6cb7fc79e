#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "meshfit/depth_io.hpp"
#include "meshfit/solver.hpp"
#include "meshfit/synth.hpp"

namespace meshfit {

// Flat key=value configuration. Lines starting with '#' and blank lines
// are ignored; insertion order is preserved for round-trip writes.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig load(const std::string& path);
    static KeyValueConfig parse(const std::string& text);
    void save(const std::string& path) const;
    std::string dump() const;

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::optional<std::string> find(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Solver keys: lambda, sigma, tau, theta, max_iters, energy_rel_tol,
// auto_steps. Unknown keys are left for other consumers.
SolverConfig solver_config_from(const KeyValueConfig& cfg);

// Scene keys: width, height, noise_sigma, outlier_frac, outlier_lo,
// outlier_hi, invalid_frac, landmark_spacing, seed, and planeN.region =
// "all" | "rect x0 y0 x1 y1" | "halfplane n1 n2 c" with planeN.a/b/c and
// optional planeN.qa/qb/qc.
SceneSpec scene_spec_from(const KeyValueConfig& cfg);

// Intrinsics keys fx, fy, cx, cy; defaults to fx = fy = max(W, H) and the
// image center when absent.
Intrinsics intrinsics_from(const KeyValueConfig& cfg, int width, int height);

} // namespace meshfit
