#include "meshfit/barycentric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace meshfit {

namespace {
constexpr double kWeightTol = 1e-12;
}

int DepthGrid::count_valid() const {
    int n = 0;
    for (std::uint8_t m : mask) n += (m != 0);
    return n;
}

std::vector<double> valid_values(const DepthGrid& grid) {
    std::vector<double> b;
    b.reserve(grid.mask.size());
    for (std::size_t k = 0; k < grid.mask.size(); ++k) {
        if (grid.mask[k]) b.push_back(grid.values[k]);
    }
    return b;
}

std::vector<double> SparseInterpolator::apply(std::span<const double> v_xi) const {
    std::vector<double> out(pixel_index.size());
    apply_into(v_xi, out);
    return out;
}

void SparseInterpolator::apply_into(std::span<const double> v_xi,
                                    std::span<double> out) const {
    if (static_cast<int>(v_xi.size()) != n_vertices) {
        throw std::invalid_argument("interpolator apply: vertex vector length mismatch");
    }
    const std::size_t n = pixel_index.size();
    for (std::size_t r = 0; r < n; ++r) {
        const auto& vi = vertex_idx[r];
        const auto& w = weight[r];
        out[r] = w[0] * v_xi[vi[0]] + w[1] * v_xi[vi[1]] + w[2] * v_xi[vi[2]];
    }
}

std::vector<double> SparseInterpolator::apply_adjoint(std::span<const double> p) const {
    std::vector<double> out(n_vertices, 0.0);
    apply_adjoint_into(p, out);
    return out;
}

void SparseInterpolator::apply_adjoint_into(std::span<const double> p,
                                            std::span<double> out) const {
    if (p.size() != pixel_index.size()) {
        throw std::invalid_argument("interpolator adjoint: dual vector length mismatch");
    }
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = pixel_index.size();
    for (std::size_t r = 0; r < n; ++r) {
        const auto& vi = vertex_idx[r];
        const auto& w = weight[r];
        const double pr = p[r];
        out[vi[0]] += w[0] * pr;
        out[vi[1]] += w[1] * pr;
        out[vi[2]] += w[2] * pr;
    }
}

TriangleLocator::TriangleLocator(const Mesh2D& mesh) : mesh_(mesh) {
    double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
    if (!mesh.vertices.empty()) {
        min_x = max_x = mesh.vertices[0].u.x;
        min_y = max_y = mesh.vertices[0].u.y;
        for (const VertexState& v : mesh.vertices) {
            min_x = std::min(min_x, v.u.x);
            max_x = std::max(max_x, v.u.x);
            min_y = std::min(min_y, v.u.y);
            max_y = std::max(max_y, v.u.y);
        }
    }
    min_x_ = min_x;
    min_y_ = min_y;
    // Cell size balances bin population against candidates per query.
    const double span_x = std::max(max_x - min_x, 1.0);
    const double span_y = std::max(max_y - min_y, 1.0);
    const int target = std::max(1, static_cast<int>(std::sqrt(
                                        static_cast<double>(mesh.triangle_count()))));
    cell_ = std::max(1.0, std::max(span_x, span_y) / target);
    nx_ = static_cast<int>(span_x / cell_) + 1;
    ny_ = static_cast<int>(span_y / cell_) + 1;
    bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 a = mesh.vertices[tri[0]].u;
        const Vec2 b = mesh.vertices[tri[1]].u;
        const Vec2 c = mesh.vertices[tri[2]].u;
        const int x0 = std::clamp(static_cast<int>((std::min({a.x, b.x, c.x}) - min_x_) / cell_), 0, nx_ - 1);
        const int x1 = std::clamp(static_cast<int>((std::max({a.x, b.x, c.x}) - min_x_) / cell_), 0, nx_ - 1);
        const int y0 = std::clamp(static_cast<int>((std::min({a.y, b.y, c.y}) - min_y_) / cell_), 0, ny_ - 1);
        const int y1 = std::clamp(static_cast<int>((std::max({a.y, b.y, c.y}) - min_y_) / cell_), 0, ny_ - 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                bins_[static_cast<std::size_t>(y) * nx_ + x].push_back(t);
            }
        }
    }
    // Ascending candidate order implements the lowest-index tie-break.
    for (auto& bin : bins_) std::sort(bin.begin(), bin.end());
}

std::pair<int, std::array<double, 3>> TriangleLocator::locate(Vec2 p) const {
    const int bx = std::clamp(static_cast<int>((p.x - min_x_) / cell_), 0, nx_ - 1);
    const int by = std::clamp(static_cast<int>((p.y - min_y_) / cell_), 0, ny_ - 1);
    for (int t : bins_[static_cast<std::size_t>(by) * nx_ + bx]) {
        const auto& tri = mesh_.triangles[t];
        const std::array<double, 3> w = barycentric(
            mesh_.vertices[tri[0]].u, mesh_.vertices[tri[1]].u,
            mesh_.vertices[tri[2]].u, p);
        if (w[0] >= -kWeightTol && w[1] >= -kWeightTol && w[2] >= -kWeightTol) {
            return {t, {std::max(w[0], 0.0), std::max(w[1], 0.0), std::max(w[2], 0.0)}};
        }
    }
    throw std::runtime_error("uncovered pixel (" + std::to_string(p.x) + ", " +
                             std::to_string(p.y) + ")");
}

std::pair<int, std::array<double, 3>> locate(const Mesh2D& mesh, Vec2 pixel) {
    return TriangleLocator(mesh).locate(pixel);
}

SparseInterpolator build_interpolator(const Mesh2D& mesh, const DepthGrid& grid) {
    TriangleLocator locator(mesh);
    SparseInterpolator interp;
    interp.n_vertices = mesh.vertex_count();
    const int n_valid = grid.count_valid();
    interp.pixel_index.reserve(n_valid);
    interp.vertex_idx.reserve(n_valid);
    interp.weight.reserve(n_valid);
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            if (!grid.valid(x, y)) continue;
            const auto [t, w] = locator.locate({static_cast<double>(x),
                                                static_cast<double>(y)});
            interp.pixel_index.push_back(static_cast<int>(grid.index(x, y)));
            interp.vertex_idx.push_back(mesh.triangles[t]);
            interp.weight.push_back(w);
        }
    }
    return interp;
}

} // namespace meshfit
