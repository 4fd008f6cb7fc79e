#pragma once

#include <cstdint>
#include <vector>

#include "meshfit/barycentric.hpp"
#include "meshfit/mesh2d.hpp"

namespace meshfit {

// A scene region: either an axis-aligned pixel rectangle (bounds
// inclusive) or a half-plane n . u <= c. Pixels take the first region
// that contains them; together the regions must cover the image.
struct SceneRegion {
    enum class Kind { rect, halfplane } kind = Kind::rect;
    // rect
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    // halfplane
    double n1 = 0.0, n2 = 0.0, c = 0.0;

    static SceneRegion all(int width, int height) {
        return {Kind::rect, 0, 0, width - 1, height - 1, 0.0, 0.0, 0.0};
    }
    bool contains(double u1, double u2) const {
        if (kind == Kind::rect) {
            return u1 >= x0 && u1 <= x1 && u2 >= y0 && u2 <= y1;
        }
        return n1 * u1 + n2 * u2 <= c;
    }
};

// Inverse depth over a region: xi(u) = a*u1 + b*u2 + c plus optional
// quadratic terms qa*u1^2 + qb*u1*u2 + qc*u2^2 for curved scenes.
struct ScenePlane {
    SceneRegion region;
    double a = 0.0, b = 0.0, c = 0.0;
    double qa = 0.0, qb = 0.0, qc = 0.0;

    double eval(double u1, double u2) const {
        return a * u1 + b * u2 + c + qa * u1 * u1 + qb * u1 * u2 + qc * u2 * u2;
    }
};

struct SceneSpec {
    int width = 0;
    int height = 0;
    std::vector<ScenePlane> planes;
    double noise_sigma = 0.0;   // gaussian std on inverse depth
    double outlier_frac = 0.0;  // fraction of pixels replaced by uniform draws
    double outlier_lo = 0.0;    // outlier range, inverse depth
    double outlier_hi = 0.0;
    double invalid_frac = 0.0;  // fraction of pixels masked invalid
    double landmark_spacing = 0.0; // jittered landmark grid; 0 disables
    std::uint64_t seed = 0;
};

struct SynthScene {
    DepthGrid observed;
    DepthGrid truth;
    std::vector<Landmark> landmarks;
};

// Deterministic scene synthesis. Ground truth is the noiseless piecewise
// field; the observed grid adds gaussian noise (redrawn while it would
// push an inlier nonpositive), replaces round(outlier_frac * N) pixels
// with uniform draws and masks round(invalid_frac * N) pixels invalid.
// Landmarks sit on a jittered grid and carry the true inverse depth.
SynthScene generate(const SceneSpec& spec);

struct GridSpec {
    double lo = 0.1;
    double hi = 2.0;
    double step = 1e-3;
};

struct OracleResult {
    std::vector<double> xi;
    double energy = 0.0;
};

// Exhaustive grid-search minimizer of the full loss over the vertex
// inverse depths, with the plane gradients held fixed at their current
// values. Only instances with at most 3 free variables are accepted
// (throws std::invalid_argument("oracle scale exceeded") otherwise).
// The innermost dimension is minimized by ternary search over the grid,
// which returns the same minimum as a full scan because the loss is
// convex along every axis.
OracleResult oracle_minimize(const Mesh2D& mesh, const SparseInterpolator& A,
                             std::span<const double> b, double lambda,
                             const GridSpec& grid = {});

} // namespace meshfit
