#include "meshfit/mesh2d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace meshfit {

namespace {

bool all_collinear(const std::vector<Vec2>& pts) {
    if (pts.size() < 3) return true;
    // Find any non-degenerate base segment, then test the rest against it.
    std::size_t b = 1;
    while (b < pts.size() && dist2(pts[0], pts[b]) == 0.0) ++b;
    if (b >= pts.size()) return true;
    for (std::size_t k = b + 1; k < pts.size(); ++k) {
        if (orient2d(pts[0], pts[b], pts[k]) != 0.0) return false;
    }
    return true;
}

struct BwTriangle {
    int a, b, c;
    bool alive = true;
};

// Rotate indices so the smallest comes first, preserving orientation.
std::array<int, 3> canonical(std::array<int, 3> t) {
    while (t[0] != std::min({t[0], t[1], t[2]})) {
        t = {t[1], t[2], t[0]};
    }
    return t;
}

} // namespace

std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 3 || all_collinear(points)) {
        throw std::invalid_argument("degenerate point set");
    }

    // Super-triangle comfortably enclosing all points. Kept moderate in
    // size so incircle determinants retain enough precision.
    double lo_x = points[0].x, hi_x = points[0].x;
    double lo_y = points[0].y, hi_y = points[0].y;
    for (const Vec2& p : points) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1.0});
    const double cx = 0.5 * (lo_x + hi_x);
    const double cy = 0.5 * (lo_y + hi_y);
    const double m = 32.0 * span;

    std::vector<Vec2> pts = points;
    pts.push_back({cx - 3.0 * m, cy - m});
    pts.push_back({cx + 3.0 * m, cy - m});
    pts.push_back({cx, cy + 3.0 * m});
    const int s0 = n, s1 = n + 1, s2 = n + 2;

    std::vector<BwTriangle> tris;
    tris.push_back({s0, s1, s2});

    // Insertion order: extreme corner points first (lowest-y among
    // leftmost/rightmost etc. is unnecessary; the caller arranges convex
    // extremes up front). Here we insert in the order given.
    std::vector<std::pair<int, int>> boundary; // cavity boundary edges
    for (int pi = 0; pi < n; ++pi) {
        const Vec2 p = pts[pi];

        // Cavity: every live triangle whose open circumdisk contains p.
        std::map<std::pair<int, int>, int> edge_count;
        std::vector<BwTriangle> dead;
        for (BwTriangle& t : tris) {
            if (!t.alive) continue;
            if (incircle(pts[t.a], pts[t.b], pts[t.c], p) > 0.0) {
                t.alive = false;
                dead.push_back(t);
                const std::pair<int, int> es[3] = {
                    {t.a, t.b}, {t.b, t.c}, {t.c, t.a}};
                for (const auto& e : es) {
                    ++edge_count[{std::min(e.first, e.second),
                                  std::max(e.first, e.second)}];
                }
            }
        }

        // Boundary edges appear exactly once among dead triangles; keep
        // their orientation so the star triangles come out CCW.
        boundary.clear();
        for (const BwTriangle& t : dead) {
            const std::pair<int, int> es[3] = {{t.a, t.b}, {t.b, t.c}, {t.c, t.a}};
            for (const auto& e : es) {
                const auto key = std::make_pair(std::min(e.first, e.second),
                                                std::max(e.first, e.second));
                if (edge_count[key] == 1) boundary.push_back(e);
            }
        }

        std::erase_if(tris, [](const BwTriangle& t) { return !t.alive; });
        for (const auto& [ea, eb] : boundary) {
            tris.push_back({ea, eb, pi});
        }
    }

    std::vector<std::array<int, 3>> out;
    out.reserve(tris.size());
    for (const BwTriangle& t : tris) {
        if (t.a >= n || t.b >= n || t.c >= n) continue; // touches super-triangle
        std::array<int, 3> tri = {t.a, t.b, t.c};
        if (orient2d(pts[tri[0]], pts[tri[1]], pts[tri[2]]) < 0.0) {
            std::swap(tri[1], tri[2]);
        }
        out.push_back(canonical(tri));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Mesh2D triangulate(const std::vector<Landmark>& landmarks, int width, int height,
                   std::optional<double> steiner_spacing) {
    if (width < 2 || height < 2) {
        throw std::invalid_argument("image size must be at least 2x2");
    }
    if (steiner_spacing && *steiner_spacing < 2.0) {
        throw std::invalid_argument("steiner spacing must be at least 2 pixels");
    }
    const double w_max = width - 1.0;
    const double h_max = height - 1.0;
    for (const Landmark& lm : landmarks) {
        if (!(lm.u.x >= 0.0 && lm.u.x <= w_max && lm.u.y >= 0.0 && lm.u.y <= h_max)) {
            throw std::invalid_argument("landmark outside image bounds");
        }
        if (lm.z && !(*lm.z > 0.0 && std::isfinite(*lm.z))) {
            throw std::invalid_argument("landmark inverse depth must be positive");
        }
    }

    Mesh2D mesh;
    mesh.width = width;
    mesh.height = height;

    auto find_nearby = [&](Vec2 u) -> int {
        for (int k = 0; k < mesh.vertex_count(); ++k) {
            if (dist2(mesh.vertices[k].u, u) <= 0.25) return k;
        }
        return -1;
    };

    // Landmarks first so they win every merge against Steiner points.
    for (const Landmark& lm : landmarks) {
        if (find_nearby(lm.u) >= 0) continue;
        VertexState v;
        v.u = lm.u;
        v.z = lm.z;
        v.is_steiner = false;
        mesh.vertices.push_back(v);
    }

    auto add_steiner = [&](Vec2 u) {
        if (find_nearby(u) >= 0) return;
        VertexState v;
        v.u = u;
        v.is_steiner = true;
        mesh.vertices.push_back(v);
    };

    if (steiner_spacing) {
        const double s = *steiner_spacing;
        std::vector<double> xs, ys;
        for (double x = 0.0; x < w_max; x += s) xs.push_back(x);
        xs.push_back(w_max);
        for (double y = 0.0; y < h_max; y += s) ys.push_back(y);
        ys.push_back(h_max);
        for (double y : ys) {
            for (double x : xs) add_steiner({x, y});
        }
    }

    const Vec2 corners[4] = {{0.0, 0.0}, {w_max, 0.0}, {0.0, h_max}, {w_max, h_max}};
    for (const Vec2& c : corners) add_steiner(c);

    // Insert corner-role vertices first so every later point lies inside
    // the closed rectangle hull; this keeps collinear boundary points from
    // ever extending past an existing hull edge.
    std::vector<int> order;
    std::vector<char> queued(mesh.vertices.size(), 0);
    for (const Vec2& c : corners) {
        for (int k = 0; k < mesh.vertex_count(); ++k) {
            if (!queued[k] && dist2(mesh.vertices[k].u, c) <= 0.25) {
                order.push_back(k);
                queued[k] = 1;
                break;
            }
        }
    }
    for (int k = 0; k < mesh.vertex_count(); ++k) {
        if (!queued[k]) order.push_back(k);
    }

    std::vector<Vec2> pts(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) pts[k] = mesh.vertices[order[k]].u;

    std::vector<std::array<int, 3>> tris = delaunay(pts);
    for (std::array<int, 3>& t : tris) {
        t = canonical({order[t[0]], order[t[1]], order[t[2]]});
    }
    std::sort(tris.begin(), tris.end());
    mesh.triangles = std::move(tris);

    // Edges: each undirected triangle side once, directed low -> high.
    std::vector<std::pair<int, int>> pairs;
    for (const auto& t : mesh.triangles) {
        pairs.emplace_back(std::min(t[0], t[1]), std::max(t[0], t[1]));
        pairs.emplace_back(std::min(t[1], t[2]), std::max(t[1], t[2]));
        pairs.emplace_back(std::min(t[2], t[0]), std::max(t[2], t[0]));
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    mesh.edges.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        mesh.edges.push_back({i, j, 0.0, 1.0});
    }
    update_edge_weights(mesh);

    mesh.out_edges.assign(mesh.vertices.size(), {});
    mesh.in_edges.assign(mesh.vertices.size(), {});
    for (int e = 0; e < mesh.edge_count(); ++e) {
        mesh.out_edges[mesh.edges[e].i].push_back(e);
        mesh.in_edges[mesh.edges[e].j].push_back(e);
    }
    return mesh;
}

void update_edge_weights(Mesh2D& mesh) {
    for (Edge& e : mesh.edges) {
        const double len = norm(mesh.vertices[e.i].u - mesh.vertices[e.j].u);
        if (len == 0.0) {
            throw std::invalid_argument("degenerate edge " + std::to_string(e.i) +
                                        "-" + std::to_string(e.j));
        }
        e.alpha = 1.0 / len;
        e.beta = 1.0;
    }
}

} // namespace meshfit
