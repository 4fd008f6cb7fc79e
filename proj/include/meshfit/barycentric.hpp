#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "meshfit/mesh2d.hpp"

namespace meshfit {

// H x W inverse-depth raster with an explicit validity mask. Invalid
// entries are never read by any operator.
struct DepthGrid {
    int width = 0;
    int height = 0;
    std::vector<double> values; // inverse depth, row-major
    std::vector<std::uint8_t> mask;

    DepthGrid() = default;
    DepthGrid(int w, int h)
        : width(w), height(h),
          values(static_cast<std::size_t>(w) * h, 0.0),
          mask(static_cast<std::size_t>(w) * h, 0) {}

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    bool valid(int x, int y) const { return mask[index(x, y)] != 0; }
    double at(int x, int y) const { return values[index(x, y)]; }
    void set(int x, int y, double v) {
        values[index(x, y)] = v;
        mask[index(x, y)] = 1;
    }
    void set_invalid(int x, int y) {
        values[index(x, y)] = 0.0;
        mask[index(x, y)] = 0;
    }
    int count_valid() const;
};

// Inverse depths of the valid pixels in raster-scan order (the data
// vector the interpolator rows are aligned with).
std::vector<double> valid_values(const DepthGrid& grid);

// Row-sparse barycentric map from vertex inverse depths to per-pixel
// inverse depths: one row of three weights per valid pixel, raster order.
struct SparseInterpolator {
    int n_vertices = 0;
    std::vector<int> pixel_index;                 // raster index per row
    std::vector<std::array<int, 3>> vertex_idx;   // triangle corners per row
    std::vector<std::array<double, 3>> weight;    // barycentric weights

    int n_rows() const { return static_cast<int>(pixel_index.size()); }

    // out[r] = sum_k weight[r][k] * v_xi[vertex_idx[r][k]]
    std::vector<double> apply(std::span<const double> v_xi) const;
    void apply_into(std::span<const double> v_xi, std::span<double> out) const;

    // Transpose action: out[v] = sum over rows touching v of weight * p[row]
    std::vector<double> apply_adjoint(std::span<const double> p) const;
    void apply_adjoint_into(std::span<const double> p, std::span<double> out) const;
};

// Point location with per-cell triangle bins. Ties on shared edges or
// vertices resolve to the lowest triangle index because candidates are
// scanned in ascending order.
class TriangleLocator {
public:
    explicit TriangleLocator(const Mesh2D& mesh);

    // Containing triangle and barycentric weights of the query point.
    // Weights down to -1e-12 are accepted and clamped to zero. Throws
    // std::runtime_error("uncovered pixel ...") when no triangle contains
    // the point.
    std::pair<int, std::array<double, 3>> locate(Vec2 p) const;

private:
    const Mesh2D& mesh_;
    double cell_ = 1.0;
    int nx_ = 0, ny_ = 0;
    double min_x_ = 0.0, min_y_ = 0.0;
    std::vector<std::vector<int>> bins_;
};

// One-shot point location (builds a locator internally; prefer
// TriangleLocator for batches).
std::pair<int, std::array<double, 3>> locate(const Mesh2D& mesh, Vec2 pixel);

// One row per valid pixel of the grid, raster order. The mesh hull must
// cover every valid pixel center.
SparseInterpolator build_interpolator(const Mesh2D& mesh, const DepthGrid& grid);

} // namespace meshfit
