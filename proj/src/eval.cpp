#include "meshfit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "meshfit/depth_io.hpp"
#include "meshfit/errors.hpp"

namespace meshfit {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

double accurate_density(const DepthGrid& estimate, const DepthGrid& truth,
                        double rel_tol) {
    if (estimate.width != truth.width || estimate.height != truth.height) {
        throw std::invalid_argument("accurate_density: grid size mismatch");
    }
    long n_truth = 0, n_ok = 0;
    for (int y = 0; y < truth.height; ++y) {
        for (int x = 0; x < truth.width; ++x) {
            if (!truth.valid(x, y)) continue;
            ++n_truth;
            if (!estimate.valid(x, y)) continue; // undefined counts as inaccurate
            const double gt = truth.at(x, y);
            if (std::abs(estimate.at(x, y) - gt) <= rel_tol * gt) ++n_ok;
        }
    }
    if (n_truth == 0) throw std::invalid_argument("accurate_density: no valid truth pixels");
    return static_cast<double>(n_ok) / static_cast<double>(n_truth);
}

DepthGrid rasterize(const Mesh2D& mesh, int width, int height) {
    DepthGrid full(width, height);
    std::fill(full.mask.begin(), full.mask.end(), 1);
    const SparseInterpolator A = build_interpolator(mesh, full);
    std::vector<double> xi(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) xi[v] = mesh.vertices[v].xi;
    const std::vector<double> px = A.apply(xi);
    DepthGrid out(width, height);
    for (int r = 0; r < A.n_rows(); ++r) {
        out.values[A.pixel_index[r]] = px[r];
        out.mask[A.pixel_index[r]] = 1;
    }
    return out;
}

std::string serialize_report(const EvalReport& report) {
    std::ostringstream out;
    out << "meshfit-report v1\n";
    out << "[mesh]\n";
    out << "vertices = " << report.vertices << "\n";
    out << "edges = " << report.edges << "\n";
    out << "faces = " << report.faces << "\n";
    out << "[solver]\n";
    out << "iterations = " << report.iterations << "\n";
    out << "wall_ms = " << fmt(report.wall_ms) << "\n";
    out << "[energy]\n";
    out << "total = " << fmt(report.energy.total) << "\n";
    out << "smooth = " << fmt(report.energy.smooth) << "\n";
    out << "depth = " << fmt(report.energy.depth) << "\n";
    out << "tracking = " << fmt(report.energy.tracking) << "\n";
    out << "[metrics]\n";
    out << "accurate_density = " << fmt(report.accurate_density) << "\n";
    out << "density_reference = " << report.density_reference << "\n";
    out << "[config]\n";
    for (const auto& [k, v] : report.config_echo) {
        out << k << " = " << v << "\n";
    }
    out << "[trajectory]\n";
    for (const auto& [it, e] : report.trajectory) {
        out << it << " " << fmt(e) << "\n";
    }
    return out.str();
}

EvalReport parse_report(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "meshfit-report v1") {
        throw IoError("not a meshfit report (bad header)");
    }
    EvalReport r;
    std::string section;
    auto split_kv = [](const std::string& s, std::string& k, std::string& v) {
        const auto eq = s.find(" = ");
        if (eq == std::string::npos) return false;
        k = s.substr(0, eq);
        v = s.substr(eq + 3);
        return true;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        if (section == "trajectory") {
            std::istringstream ss(line);
            int it = 0;
            double e = 0.0;
            ss >> it >> e;
            if (!ss) throw IoError("bad trajectory line: " + line);
            r.trajectory.emplace_back(it, e);
            continue;
        }
        std::string k, v;
        if (!split_kv(line, k, v)) throw IoError("bad report line: " + line);
        if (section == "mesh") {
            if (k == "vertices") r.vertices = std::stoi(v);
            else if (k == "edges") r.edges = std::stoi(v);
            else if (k == "faces") r.faces = std::stoi(v);
        } else if (section == "solver") {
            if (k == "iterations") r.iterations = std::stoi(v);
            else if (k == "wall_ms") r.wall_ms = std::stod(v);
        } else if (section == "energy") {
            if (k == "total") r.energy.total = std::stod(v);
            else if (k == "smooth") r.energy.smooth = std::stod(v);
            else if (k == "depth") r.energy.depth = std::stod(v);
            else if (k == "tracking") r.energy.tracking = std::stod(v);
        } else if (section == "metrics") {
            if (k == "accurate_density") r.accurate_density = std::stod(v);
            else if (k == "density_reference") r.density_reference = v;
        } else if (section == "config") {
            r.config_echo.emplace_back(k, v);
        } else {
            throw IoError("unknown report section: " + section);
        }
    }
    return r;
}

std::string dump_residuals(const DepthGrid& estimate, const DepthGrid& truth,
                           double rel_tol) {
    std::ostringstream out;
    out << "x,y,estimate,truth,accurate\n";
    for (int y = 0; y < truth.height; ++y) {
        for (int x = 0; x < truth.width; ++x) {
            if (!truth.valid(x, y)) continue;
            const double gt = truth.at(x, y);
            const bool defined = estimate.valid(x, y);
            const double est = defined ? estimate.at(x, y) : 0.0;
            const bool ok = defined && std::abs(est - gt) <= rel_tol * gt;
            out << x << "," << y << "," << (defined ? fmt(est) : "nan") << ","
                << fmt(gt) << "," << (ok ? 1 : 0) << "\n";
        }
    }
    return out.str();
}

double density_from_residuals(const std::string& dump) {
    std::istringstream in(dump);
    std::string line;
    std::getline(in, line); // header
    long n = 0, ok = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++n;
        const auto last = line.rfind(',');
        if (last == std::string::npos) throw IoError("bad residual line: " + line);
        ok += (line.substr(last + 1) == "1");
    }
    if (n == 0) throw IoError("empty residual dump");
    return static_cast<double>(ok) / static_cast<double>(n);
}

namespace {

EvalReport make_report(const Mesh2D& mesh, const SolveDiagnostics& diag,
                       double density, const std::string& reference,
                       const KeyValueConfig& echo) {
    EvalReport r;
    r.accurate_density = density;
    r.density_reference = reference;
    r.energy = diag.energy;
    r.iterations = diag.iterations;
    r.wall_ms = diag.wall_ms;
    r.vertices = mesh.vertex_count();
    r.edges = mesh.edge_count();
    r.faces = mesh.triangle_count();
    r.config_echo = echo.entries();
    r.trajectory = diag.trajectory;
    return r;
}

} // namespace

FitResult run_fit(const std::string& depth_path, const FitOptions& options) {
    const DepthGrid observed = read_depth(depth_path, depth_format_from_path(depth_path));

    std::vector<Landmark> landmarks;
    if (options.landmarks_path) {
        landmarks = read_landmarks(*options.landmarks_path).landmarks;
    }

    KeyValueConfig cfg;
    if (options.config_path) cfg = KeyValueConfig::load(*options.config_path);
    SolverConfig solver_cfg = solver_config_from(cfg);
    if (options.lambda) solver_cfg.lambda = *options.lambda;
    if (options.max_iters) solver_cfg.max_iters = *options.max_iters;

    std::optional<double> steiner = options.steiner_spacing;
    if (cfg.has("steiner_spacing")) steiner = cfg.get_double("steiner_spacing");
    if (steiner && *steiner <= 0.0) steiner.reset();

    FitResult result;
    result.mesh = triangulate(landmarks, observed.width, observed.height, steiner);
    result.diagnostics = solve(result.mesh, observed, solver_cfg);

    const DepthGrid est = rasterize(result.mesh, observed.width, observed.height);
    const double density = accurate_density(est, observed);

    KeyValueConfig echo;
    echo.set_double("lambda", solver_cfg.lambda);
    echo.set_double("theta", solver_cfg.theta);
    echo.set("max_iters", std::to_string(solver_cfg.max_iters));
    echo.set_double("energy_rel_tol", solver_cfg.energy_rel_tol);
    echo.set("auto_steps", solver_cfg.auto_steps ? "true" : "false");
    echo.set_double("sigma", result.diagnostics.sigma);
    echo.set_double("tau", result.diagnostics.tau);
    if (steiner) echo.set_double("steiner_spacing", *steiner);
    echo.set("depth_path", depth_path);
    if (options.landmarks_path) echo.set("landmarks_path", *options.landmarks_path);

    result.report = make_report(result.mesh, result.diagnostics, density,
                                "input-depth", echo);

    if (options.mesh_out) {
        const Intrinsics k = intrinsics_from(cfg, observed.width, observed.height);
        write_mesh(result.mesh, k, *options.mesh_out, options.mesh_format);
    }
    if (options.depth_out) {
        write_depth(est, *options.depth_out, depth_format_from_path(*options.depth_out));
    }
    if (options.report_out) {
        std::ofstream out(*options.report_out);
        if (!out) throw IoError("cannot write " + *options.report_out);
        out << serialize_report(result.report);
    }
    return result;
}

std::vector<AblationRow> run_ablation(const SceneSpec& spec,
                                      std::vector<double> spacings,
                                      const SolverConfig& solver) {
    if (spacings.empty()) {
        throw std::invalid_argument("ablation needs at least one spacing");
    }
    std::sort(spacings.begin(), spacings.end(), std::greater<>());
    const SynthScene scene = generate(spec);

    std::vector<AblationRow> rows;
    for (double s : spacings) {
        Mesh2D mesh = triangulate(scene.landmarks, spec.width, spec.height, s);
        const SolveDiagnostics diag = solve(mesh, scene.observed, solver);
        const DepthGrid est = rasterize(mesh, spec.width, spec.height);
        AblationRow row;
        row.spacing = s;
        row.density = accurate_density(est, scene.truth);
        row.time_ms = diag.wall_ms;
        row.iterations = diag.iterations;
        rows.push_back(row);
    }
    return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << "spacing\taccurate_density\ttime_ms\n";
    for (const AblationRow& r : rows) {
        out << fmt(r.spacing) << "\t" << fmt(r.density) << "\t" << fmt(r.time_ms) << "\n";
    }
    return out.str();
}

} // namespace meshfit
