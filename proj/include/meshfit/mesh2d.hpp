#pragma once

#include <array>
#include <optional>
#include <vector>

#include "meshfit/geometry.hpp"

namespace meshfit {

// A landmark is a tracked image point with an optional inverse depth from
// the odometry front end.
struct Landmark {
    Vec2 u;
    std::optional<double> z; // inverse depth, 1/m; > 0 when present
};

// Per-vertex primal state: inverse depth xi and the projected plane
// gradient w (units of inverse depth per pixel).
struct VertexState {
    Vec2 u;                  // pixel position, subpixel-capable
    double xi = 0.0;         // inverse depth, 1/m
    Vec2 w{0.0, 0.0};        // plane gradient of xi over the image
    std::optional<double> z; // tracked inverse depth, if this is a landmark
    bool is_steiner = false;
};

// Directed edge i -> j with smoothness weights. alpha is 1/length in
// pixels, beta is dimensionless.
struct Edge {
    int i = -1;
    int j = -1;
    double alpha = 0.0;
    double beta = 1.0;
};

// Planar triangulation over the image with per-vertex solver state.
// Immutable topology after construction; edges are the union of triangle
// sides, stored once, directed from lower to higher vertex index.
struct Mesh2D {
    std::vector<VertexState> vertices;
    std::vector<std::array<int, 3>> triangles; // counter-clockwise
    std::vector<Edge> edges;
    std::vector<std::vector<int>> out_edges; // edge indices with source v
    std::vector<std::vector<int>> in_edges;  // edge indices with sink v
    int width = 0;  // image extent the mesh was built for
    int height = 0;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
};

// Delaunay triangulation of a fixed point set (no augmentation). Points
// must be pairwise distinct. Throws std::invalid_argument("degenerate
// point set") when fewer than 3 non-collinear points are given.
std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& points);

// Builds the mesh over the landmarks, an optional regular Steiner grid
// with the given spacing, and the four image corners. Points closer than
// 0.5 px are merged, landmarks taking precedence over Steiner points.
Mesh2D triangulate(const std::vector<Landmark>& landmarks, int width, int height,
                   std::optional<double> steiner_spacing = std::nullopt);

// Recomputes alpha = 1/|u_i - u_j| and beta = 1 on every edge. Throws
// std::invalid_argument("degenerate edge") on a zero-length edge.
void update_edge_weights(Mesh2D& mesh);

} // namespace meshfit
