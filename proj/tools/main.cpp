// Command-line front end: fit a mesh to a depth map, synthesize test
// scenes, score estimates against ground truth, run the Steiner-spacing
// ablation, and benchmark the solver.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "meshfit/config.hpp"
#include "meshfit/depth_io.hpp"
#include "meshfit/errors.hpp"
#include "meshfit/eval.hpp"
#include "meshfit/solver.hpp"
#include "meshfit/synth.hpp"

namespace {

constexpr int kExitSolver = 1;
constexpr int kExitUsage = 2;

using namespace meshfit;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

int cmd_fit(const std::string& depth, const FitOptions& options) {
    const FitResult result = run_fit(depth, options);
    std::cout << "fit: " << result.mesh.vertex_count() << " vertices, "
              << result.diagnostics.iterations << " iterations, energy "
              << result.diagnostics.energy.total << ", density vs input "
              << result.report.accurate_density << "\n";
    return 0;
}

int cmd_synth(const std::string& config_path, std::optional<long> seed,
              const std::string& out_depth, const std::string& out_truth,
              const std::string& out_landmarks) {
    SceneSpec spec = scene_spec_from(KeyValueConfig::load(config_path));
    if (seed) spec.seed = static_cast<std::uint64_t>(*seed);
    const SynthScene scene = generate(spec);
    write_depth(scene.observed, out_depth, depth_format_from_path(out_depth));
    if (!out_truth.empty()) {
        write_depth(scene.truth, out_truth, depth_format_from_path(out_truth));
    }
    if (!out_landmarks.empty()) {
        write_landmarks(scene.landmarks, out_landmarks);
    }
    std::cout << "synth: " << spec.width << "x" << spec.height << ", "
              << scene.landmarks.size() << " landmarks\n";
    return 0;
}

int cmd_eval(const std::string& estimate_path, const std::string& truth_path,
             double tol, const std::string& report_out,
             const std::string& residuals_out) {
    const DepthGrid est = read_depth(estimate_path, depth_format_from_path(estimate_path));
    const DepthGrid truth = read_depth(truth_path, depth_format_from_path(truth_path));
    const double density = accurate_density(est, truth, tol);

    if (!residuals_out.empty()) {
        write_text(residuals_out, dump_residuals(est, truth, tol));
    }
    if (!report_out.empty()) {
        EvalReport report;
        report.accurate_density = density;
        report.density_reference = "ground-truth";
        KeyValueConfig echo;
        echo.set("estimate_path", estimate_path);
        echo.set("truth_path", truth_path);
        echo.set_double("rel_tol", tol);
        report.config_echo = echo.entries();
        write_text(report_out, serialize_report(report));
    }
    std::cout << "accurate_density = " << density << "\n";
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::vector<double>& spacings,
               std::optional<long> seed, std::optional<double> lambda,
               std::optional<int> iters, const std::string& out) {
    SceneSpec spec = scene_spec_from(KeyValueConfig::load(config_path));
    if (seed) spec.seed = static_cast<std::uint64_t>(*seed);
    SolverConfig solver;
    if (lambda) solver.lambda = *lambda;
    if (iters) solver.max_iters = *iters;
    solver.max_iters = std::max(solver.max_iters, 1);

    const std::vector<AblationRow> rows = run_ablation(spec, spacings, solver);
    const std::string table = ablation_table(rows);
    if (!out.empty()) {
        write_text(out, table);
    }
    std::cout << table;
    return 0;
}

int cmd_bench(int width, int height, double steiner, int iters, long seed) {
    SceneSpec spec;
    spec.width = width;
    spec.height = height;
    spec.seed = static_cast<std::uint64_t>(seed);
    ScenePlane plane;
    plane.region = SceneRegion::all(width, height);
    plane.a = 0.4 / width;
    plane.b = 0.2 / height;
    plane.c = 0.4;
    spec.planes.push_back(plane);
    spec.noise_sigma = 0.01;
    const SynthScene scene = generate(spec);

    Mesh2D mesh = triangulate({}, width, height, steiner);
    SolverConfig cfg;
    cfg.max_iters = iters;
    cfg.energy_rel_tol = 0.0; // fixed budget
    const auto t0 = std::chrono::steady_clock::now();
    const SolveDiagnostics diag = solve(mesh, scene.observed, cfg);
    const double total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    std::cout << "bench: " << width << "x" << height << " steiner " << steiner
              << " iters " << diag.iterations << "\n"
              << "solve_ms = " << diag.wall_ms << "\n"
              << "pipeline_ms = " << total_ms << "\n"
              << "dual_update_ms_avg = " << diag.dual_update_ms_avg << "\n"
              << "vertices = " << mesh.vertex_count() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational mesh fitting to inverse-depth maps"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "fit a mesh to a depth map");
    std::string fit_depth, fit_out, fit_format = "obj";
    FitOptions options;
    std::string fit_landmarks, fit_config, fit_report, fit_out_depth;
    double fit_steiner = 50.0;
    double fit_lambda = -1.0;
    int fit_iters = -1;
    fit->add_option("--depth", fit_depth, "input depth map (.pfm/.pgm/.csv)")->required();
    fit->add_option("--landmarks", fit_landmarks, "landmark CSV (u1,u2[,depth_m])");
    fit->add_option("--config", fit_config, "solver config file");
    fit->add_option("--out", fit_out, "output mesh path");
    fit->add_option("--format", fit_format, "mesh format: obj or ply")
        ->check(CLI::IsMember({"obj", "ply"}));
    fit->add_option("--report", fit_report, "write fit report here");
    fit->add_option("--out-depth", fit_out_depth, "write rasterized fit here");
    fit->add_option("--steiner", fit_steiner, "Steiner spacing in pixels (<= 0 disables)");
    fit->add_option("--lambda", fit_lambda, "data weight override");
    fit->add_option("--iters", fit_iters, "iteration budget override");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    std::string synth_config, synth_depth, synth_truth, synth_landmarks;
    long synth_seed = -1;
    synth->add_option("--config", synth_config, "scene spec config")->required();
    synth->add_option("--seed", synth_seed, "seed override");
    synth->add_option("--out-depth", synth_depth, "observed depth output")->required();
    synth->add_option("--out-truth", synth_truth, "ground truth output");
    synth->add_option("--out-landmarks", synth_landmarks, "landmark CSV output");

    // eval
    auto* eval = app.add_subcommand("eval", "score an estimate against ground truth");
    std::string eval_est, eval_truth, eval_report, eval_residuals;
    double eval_tol = 0.10;
    eval->add_option("--estimate", eval_est, "estimated depth map")->required();
    eval->add_option("--truth", eval_truth, "ground truth depth map")->required();
    eval->add_option("--tol", eval_tol, "relative tolerance (default 0.10)");
    eval->add_option("--report", eval_report, "write eval report here");
    eval->add_option("--residuals", eval_residuals, "write per-pixel residual CSV here");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "Steiner spacing ablation");
    std::string ablate_config, ablate_out;
    std::vector<double> ablate_spacings;
    long ablate_seed = -1;
    double ablate_lambda = -1.0;
    int ablate_iters = -1;
    ablate->add_option("--config", ablate_config, "scene spec config")->required();
    ablate->add_option("--spacings", ablate_spacings, "spacings in pixels")
        ->required()
        ->delimiter(',');
    ablate->add_option("--seed", ablate_seed, "seed override");
    ablate->add_option("--lambda", ablate_lambda, "data weight override");
    ablate->add_option("--iters", ablate_iters, "iteration budget override");
    ablate->add_option("--out", ablate_out, "write TSV table here");

    // bench
    auto* bench = app.add_subcommand("bench", "solver timing on a synthetic scene");
    int bench_w = 640, bench_h = 480, bench_iters = 200;
    double bench_steiner = 50.0;
    long bench_seed = 7;
    bench->add_option("--width", bench_w, "image width");
    bench->add_option("--height", bench_h, "image height");
    bench->add_option("--steiner", bench_steiner, "Steiner spacing");
    bench->add_option("--iters", bench_iters, "iteration budget");
    bench->add_option("--seed", bench_seed, "scene seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message
        return kExitUsage;
    }

    try {
        if (fit->parsed()) {
            if (!fit_landmarks.empty()) options.landmarks_path = fit_landmarks;
            if (!fit_config.empty()) options.config_path = fit_config;
            if (!fit_out.empty()) options.mesh_out = fit_out;
            options.mesh_format = fit_format == "ply" ? MeshFormat::ply : MeshFormat::obj;
            if (!fit_report.empty()) options.report_out = fit_report;
            if (!fit_out_depth.empty()) options.depth_out = fit_out_depth;
            options.steiner_spacing =
                fit_steiner > 0.0 ? std::optional<double>(fit_steiner) : std::nullopt;
            if (fit_lambda >= 0.0) options.lambda = fit_lambda;
            if (fit_iters > 0) options.max_iters = fit_iters;
            return cmd_fit(fit_depth, options);
        }
        if (synth->parsed()) {
            return cmd_synth(synth_config,
                             synth_seed >= 0 ? std::optional<long>(synth_seed) : std::nullopt,
                             synth_depth, synth_truth, synth_landmarks);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_est, eval_truth, eval_tol, eval_report, eval_residuals);
        }
        if (ablate->parsed()) {
            return cmd_ablate(ablate_config, ablate_spacings,
                              ablate_seed >= 0 ? std::optional<long>(ablate_seed) : std::nullopt,
                              ablate_lambda >= 0.0 ? std::optional<double>(ablate_lambda)
                                                   : std::nullopt,
                              ablate_iters > 0 ? std::optional<int>(ablate_iters) : std::nullopt,
                              ablate_out);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_w, bench_h, bench_steiner, bench_iters, bench_seed);
        }
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
