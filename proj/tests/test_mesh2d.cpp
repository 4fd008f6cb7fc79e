#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "meshfit/barycentric.hpp"
#include "meshfit/mesh2d.hpp"
#include "meshfit/rng.hpp"
#include "test_support.hpp"

using namespace meshfit;

namespace {

// Interior faces only, so a triangulated disk satisfies V - E + F = 1.
void check_euler(const Mesh2D& mesh) {
    CHECK(mesh.vertex_count() - mesh.edge_count() + mesh.triangle_count() == 1);
}

void check_adjacency(const Mesh2D& mesh) {
    std::set<std::pair<int, int>> seen;
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const Edge& edge = mesh.edges[e];
        CHECK(edge.i < edge.j); // fixed direction rule
        CHECK(!seen.count({edge.i, edge.j}));
        seen.insert({edge.i, edge.j});
        const auto& out = mesh.out_edges[edge.i];
        const auto& in = mesh.in_edges[edge.j];
        CHECK(std::count(out.begin(), out.end(), e) == 1);
        CHECK(std::count(in.begin(), in.end(), e) == 1);
    }
}

} // namespace

TEST_CASE("triangulate: pure Steiner grid on a 64x64 image") {
    const Mesh2D mesh = triangulate({}, 64, 64, 50.0);

    // Grid coordinates {0, 50, 63} in both axes; corners merge with it.
    REQUIRE(mesh.vertex_count() == 9);
    std::set<std::pair<double, double>> expect;
    for (double y : {0.0, 50.0, 63.0}) {
        for (double x : {0.0, 50.0, 63.0}) expect.insert({x, y});
    }
    std::set<std::pair<double, double>> got;
    for (const VertexState& v : mesh.vertices) {
        CHECK(v.is_steiner);
        got.insert({v.u.x, v.u.y});
    }
    CHECK(got == expect);
    check_euler(mesh);
    check_adjacency(mesh);

    // Every pixel center of the image lies in exactly one located triangle.
    TriangleLocator locator(mesh);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            CHECK_NOTHROW(locator.locate({double(x), double(y)}));
        }
    }
}

TEST_CASE("triangulate: landmarks plus corners, no Steiner grid") {
    const std::vector<Landmark> lms = {
        {{10.0, 12.0}, 0.5}, {{40.0, 20.0}, std::nullopt}, {{25.0, 50.0}, 1.0}};
    const Mesh2D mesh = triangulate(lms, 64, 64);
    REQUIRE(mesh.vertex_count() == 7);
    CHECK_FALSE(mesh.vertices[0].is_steiner);
    CHECK(mesh.vertices[0].z == 0.5);
    check_euler(mesh);
    check_adjacency(mesh);

    TriangleLocator locator(mesh);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            CHECK_NOTHROW(locator.locate({double(x), double(y)}));
        }
    }
}

TEST_CASE("triangulate: landmark on a Steiner node wins the merge") {
    const std::vector<Landmark> lms = {{{50.0, 50.0}, 0.8}};
    const Mesh2D mesh = triangulate(lms, 64, 64, 50.0);
    REQUIRE(mesh.vertex_count() == 9); // landmark replaced the grid node
    int found = 0;
    for (const VertexState& v : mesh.vertices) {
        if (v.u.x == 50.0 && v.u.y == 50.0) {
            ++found;
            CHECK_FALSE(v.is_steiner);
            CHECK(v.z == 0.8);
        }
    }
    CHECK(found == 1);
}

TEST_CASE("triangulate: near-duplicate landmarks merge within half a pixel") {
    const std::vector<Landmark> lms = {{{20.0, 20.0}, 0.5}, {{20.3, 20.2}, 0.7}};
    const Mesh2D mesh = triangulate(lms, 64, 64);
    REQUIRE(mesh.vertex_count() == 5); // one merged landmark + 4 corners
    CHECK(mesh.vertices[0].z == 0.5);  // first one kept
}

TEST_CASE("triangulate: input validation") {
    CHECK_THROWS_AS(triangulate({{{100.0, 10.0}, std::nullopt}}, 64, 64),
                    std::invalid_argument);
    CHECK_THROWS_AS(triangulate({}, 1, 64), std::invalid_argument);
    CHECK_THROWS_AS(triangulate({}, 64, 64, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(triangulate({{{10.0, 10.0}, -0.5}}, 64, 64), std::invalid_argument);
}

TEST_CASE("delaunay: degenerate point sets are rejected") {
    CHECK_THROWS_WITH_AS(delaunay({{0, 0}, {1, 1}}), "degenerate point set",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(delaunay({{0, 0}, {1, 1}, {2, 2}, {3, 3}}),
                         "degenerate point set", std::invalid_argument);
}

TEST_CASE("delaunay: empty circumcircle property on random point sets") {
    Rng rng(101, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng.uniform_index(46));
        std::vector<Vec2> pts;
        for (int k = 0; k < n; ++k) {
            pts.push_back({rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)});
        }
        const auto tris = delaunay(pts);
        REQUIRE(!tris.empty());
        for (const auto& t : tris) {
            const double area = orient2d(pts[t[0]], pts[t[1]], pts[t[2]]);
            CHECK(area > 0.0); // counter-clockwise, nondegenerate
            for (int v = 0; v < n; ++v) {
                if (v == t[0] || v == t[1] || v == t[2]) continue;
                CHECK(incircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[v]) <= 1e-9);
            }
        }
    }
}

TEST_CASE("triangulate: Euler and adjacency on random meshes") {
    Rng rng(202, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = static_cast<int>(rng.uniform_index(20));
        auto lms = meshfit::testing::random_landmarks(rng, n, 48, 40);
        const Mesh2D mesh = triangulate(lms, 48, 40, trial % 2 ? std::optional<double>(16.0)
                                                               : std::nullopt);
        check_euler(mesh);
        check_adjacency(mesh);

        // Edges are exactly the union of triangle sides.
        std::set<std::pair<int, int>> from_tris;
        for (const auto& t : mesh.triangles) {
            from_tris.insert({std::min(t[0], t[1]), std::max(t[0], t[1])});
            from_tris.insert({std::min(t[1], t[2]), std::max(t[1], t[2])});
            from_tris.insert({std::min(t[2], t[0]), std::max(t[2], t[0])});
        }
        REQUIRE(from_tris.size() == static_cast<std::size_t>(mesh.edge_count()));
        for (const Edge& e : mesh.edges) CHECK(from_tris.count({e.i, e.j}));
    }
}

TEST_CASE("edge weights: inverse length and unit beta") {
    Mesh2D mesh;
    mesh.vertices.resize(3);
    mesh.vertices[0].u = {0.0, 0.0};
    mesh.vertices[1].u = {3.0, 4.0};
    mesh.vertices[2].u = {1.0, 0.0};
    mesh.edges = {{0, 1, 0.0, 0.0}, {0, 2, 0.0, 0.0}};
    update_edge_weights(mesh);
    CHECK(mesh.edges[0].alpha == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(mesh.edges[0].beta == 1.0);
    CHECK(mesh.edges[1].alpha == 1.0);

    mesh.vertices[1].u = {0.0, 0.0}; // collapse edge 0
    CHECK_THROWS_AS(update_edge_weights(mesh), std::invalid_argument);
}
