#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "meshfit/barycentric.hpp"
#include "meshfit/config.hpp"
#include "meshfit/mesh2d.hpp"
#include "meshfit/solver.hpp"
#include "meshfit/synth.hpp"

namespace meshfit {

// Fraction of truth-valid pixels whose estimated inverse depth lies
// within rel_tol of the true one. Pixels the estimate does not define
// count as inaccurate. Throws when the truth grid has no valid pixel.
double accurate_density(const DepthGrid& estimate, const DepthGrid& truth,
                        double rel_tol = 0.10);

// Per-pixel inverse depth of the mesh over a full W x H raster.
DepthGrid rasterize(const Mesh2D& mesh, int width, int height);

struct EvalReport {
    double accurate_density = 0.0;
    std::string density_reference; // "input-depth" or "ground-truth"
    EnergyBreakdown energy;
    int iterations = 0;
    double wall_ms = 0.0;
    int vertices = 0;
    int edges = 0;
    int faces = 0;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<std::pair<int, double>> trajectory;
};

// Versioned, machine-diffable serialization with a fixed field order.
std::string serialize_report(const EvalReport& report);
EvalReport parse_report(const std::string& text);

// Per-pixel residual dump aligned with the truth grid:
// "x,y,estimate,truth,accurate" per truth-valid pixel.
std::string dump_residuals(const DepthGrid& estimate, const DepthGrid& truth,
                           double rel_tol = 0.10);
// Recomputes the density from a residual dump (exact same counting).
double density_from_residuals(const std::string& dump);

struct FitOptions {
    std::optional<std::string> landmarks_path;
    std::optional<std::string> config_path;
    std::optional<double> steiner_spacing = 50.0;
    std::optional<double> lambda;
    std::optional<int> max_iters;
    std::optional<std::string> mesh_out;
    MeshFormat mesh_format = MeshFormat::obj;
    std::optional<std::string> depth_out; // rasterized fit
    std::optional<std::string> report_out;
};

struct FitResult {
    Mesh2D mesh;
    SolveDiagnostics diagnostics;
    EvalReport report;
};

// Full pipeline: read depth (+landmarks), triangulate, solve, write the
// requested artifacts. The report density is measured against the input
// depth map.
FitResult run_fit(const std::string& depth_path, const FitOptions& options);

struct AblationRow {
    double spacing = 0.0;
    double density = 0.0;
    double time_ms = 0.0;
    int iterations = 0;
};

// Fits the same generated scene once per Steiner spacing and scores each
// mesh against the scene's ground truth. Rows come back ordered from the
// coarsest spacing to the finest.
std::vector<AblationRow> run_ablation(const SceneSpec& spec,
                                      std::vector<double> spacings,
                                      const SolverConfig& solver);

// TSV with a header line: spacing, accurate_density, time_ms.
std::string ablation_table(const std::vector<AblationRow>& rows);

} // namespace meshfit
