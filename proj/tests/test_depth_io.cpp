#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "meshfit/depth_io.hpp"
#include "meshfit/errors.hpp"
#include "meshfit/mesh2d.hpp"
#include "meshfit/rng.hpp"

using namespace meshfit;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out);
    out << text;
}

} // namespace

TEST_CASE("depth CSV: depths convert to inverse depth, zeros go invalid") {
    const std::string path = temp_path("meshfit_depth.csv");
    spit(path, "1,2\n4,0.5\n");
    const DepthGrid grid = read_depth(path, DepthFormat::csv);
    REQUIRE(grid.width == 2);
    REQUIRE(grid.height == 2);
    CHECK(grid.at(0, 0) == 1.0);
    CHECK(grid.at(1, 0) == 0.5);
    CHECK(grid.at(0, 1) == 0.25);
    CHECK(grid.at(1, 1) == 2.0);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 2; ++x) CHECK(grid.valid(x, y));
    }

    spit(path, "1,0\nnan,2\n");
    const DepthGrid masked = read_depth(path, DepthFormat::csv);
    CHECK(masked.valid(0, 0));
    CHECK_FALSE(masked.valid(1, 0));
    CHECK_FALSE(masked.valid(0, 1));
    CHECK(masked.valid(1, 1));
}

TEST_CASE("depth formats round-trip bit-exactly on their own output") {
    Rng rng(55, 0);
    DepthGrid grid(13, 9);
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            if (rng.uniform() < 0.15) {
                grid.set_invalid(x, y);
            } else {
                grid.set(x, y, rng.uniform(0.1, 2.5));
            }
        }
    }

    SUBCASE("pfm") {
        const std::string p1 = temp_path("meshfit_a.pfm");
        const std::string p2 = temp_path("meshfit_b.pfm");
        write_depth(grid, p1, DepthFormat::pfm);
        const DepthGrid back = read_depth(p1, DepthFormat::pfm);
        CHECK(back.mask == grid.mask);
        write_depth(back, p2, DepthFormat::pfm);
        CHECK(slurp(p1) == slurp(p2));
    }

    SUBCASE("pgm16 with sidecar scale") {
        const std::string p1 = temp_path("meshfit_a.pgm");
        const std::string p2 = temp_path("meshfit_b.pgm");
        write_depth(grid, p1, DepthFormat::pgm16);
        const DepthGrid back = read_depth(p1, DepthFormat::pgm16);
        CHECK(back.mask == grid.mask);
        write_depth(back, p2, DepthFormat::pgm16);
        CHECK(slurp(p1) == slurp(p2));
        CHECK(slurp(p1 + ".scale") == slurp(p2 + ".scale"));
    }

    SUBCASE("csv") {
        const std::string p1 = temp_path("meshfit_a.csv");
        const std::string p2 = temp_path("meshfit_b.csv");
        write_depth(grid, p1, DepthFormat::csv);
        const DepthGrid back = read_depth(p1, DepthFormat::csv);
        CHECK(back.mask == grid.mask);
        for (std::size_t k = 0; k < grid.values.size(); ++k) {
            if (grid.mask[k]) {
                CHECK(back.values[k] == doctest::Approx(grid.values[k]).epsilon(1e-15));
            }
        }
        write_depth(back, p2, DepthFormat::csv);
        CHECK(slurp(p1) == slurp(p2));
    }
}

TEST_CASE("depth readers report malformed input") {
    const std::string path = temp_path("meshfit_bad.pfm");
    spit(path, "P6\n2 2\n-1.0\nxxxx");
    CHECK_THROWS_AS(read_depth(path, DepthFormat::pfm), IoError);
    spit(path, "Pf\n2 2\n-1.0\nxx"); // truncated payload
    CHECK_THROWS_AS(read_depth(path, DepthFormat::pfm), IoError);
    CHECK_THROWS_AS(read_depth(temp_path("meshfit_missing.pfm"), DepthFormat::pfm),
                    IoError);
    const std::string pgm = temp_path("meshfit_noscale.pgm");
    spit(pgm, "P5\n1 1\n65535\n\x01\x00");
    CHECK_THROWS_AS(read_depth(pgm, DepthFormat::pgm16), IoError); // missing sidecar
    const std::string csv = temp_path("meshfit_ragged.csv");
    spit(csv, "1,2\n3\n");
    CHECK_THROWS_AS(read_depth(csv, DepthFormat::csv), IoError);
}

TEST_CASE("landmark CSV") {
    const std::string path = temp_path("meshfit_lm.csv");

    SUBCASE("depths become inverse depths") {
        spit(path, "10,20,4.0\n1.5,2.5\n");
        const LandmarkReadResult r = read_landmarks(path);
        REQUIRE(r.landmarks.size() == 2);
        CHECK(r.landmarks[0].u.x == 10.0);
        CHECK(r.landmarks[0].u.y == 20.0);
        CHECK(*r.landmarks[0].z == 0.25);
        CHECK_FALSE(r.landmarks[1].z.has_value());
        CHECK(r.rejected == 0);
    }

    SUBCASE("nonpositive depths are rejected and counted") {
        spit(path, "10,20,-1\n5,5,2.0\n");
        const LandmarkReadResult r = read_landmarks(path);
        REQUIRE(r.landmarks.size() == 1);
        CHECK(*r.landmarks[0].z == 0.5);
        CHECK(r.rejected == 1);
    }

    SUBCASE("empty file is a valid pure-Steiner input") {
        spit(path, "");
        const LandmarkReadResult r = read_landmarks(path);
        CHECK(r.landmarks.empty());
    }

    SUBCASE("malformed lines carry the line number") {
        spit(path, "10,20,4.0\nbogus\n");
        try {
            read_landmarks(path);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }

    SUBCASE("round trip") {
        std::vector<Landmark> lms = {{{10.5, 20.25}, 0.25}, {{3.0, 4.0}, std::nullopt}};
        write_landmarks(lms, path);
        const LandmarkReadResult r = read_landmarks(path);
        REQUIRE(r.landmarks.size() == 2);
        CHECK(r.landmarks[0].u.x == 10.5);
        CHECK(*r.landmarks[0].z == 0.25);
        CHECK_FALSE(r.landmarks[1].z.has_value());
    }
}

TEST_CASE("mesh export") {
    Mesh2D mesh = triangulate({}, 9, 9, 4.0);
    for (VertexState& v : mesh.vertices) v.xi = 0.5;
    const Intrinsics k{100.0, 100.0, 4.0, 4.0};

    SUBCASE("vertex at the principal point back-projects onto the axis") {
        Mesh2D single;
        single.vertices.resize(1);
        single.vertices[0].u = {4.0, 4.0};
        single.vertices[0].xi = 0.5;
        const MeshFile mf = back_project(single, k);
        CHECK(mf.vertices[0][0] == 0.0);
        CHECK(mf.vertices[0][1] == 0.0);
        CHECK(mf.vertices[0][2] == 2.0);
    }

    SUBCASE("nonpositive inverse depth is rejected") {
        Mesh2D bad = mesh;
        bad.vertices[2].xi = 0.0;
        CHECK_THROWS_AS(back_project(bad, k), std::invalid_argument);
    }

    SUBCASE("obj round trip preserves coordinates") {
        const std::string path = temp_path("meshfit_mesh.obj");
        write_mesh(mesh, k, path, MeshFormat::obj);
        const MeshFile back = read_mesh(path, MeshFormat::obj);
        const MeshFile expect = back_project(mesh, k);
        REQUIRE(back.vertices.size() == expect.vertices.size());
        REQUIRE(back.faces.size() == expect.faces.size());
        for (std::size_t v = 0; v < back.vertices.size(); ++v) {
            for (int c = 0; c < 3; ++c) {
                CHECK(back.vertices[v][c] ==
                      doctest::Approx(expect.vertices[v][c]).epsilon(1e-6));
            }
        }
        CHECK(back.faces == expect.faces);
    }

    SUBCASE("ply stores every face and round-trips") {
        const std::string path = temp_path("meshfit_mesh.ply");
        write_mesh(mesh, k, path, MeshFormat::ply);
        const MeshFile back = read_mesh(path, MeshFormat::ply);
        CHECK(back.faces.size() == static_cast<std::size_t>(mesh.triangle_count()));
        CHECK(back.vertices.size() == static_cast<std::size_t>(mesh.vertex_count()));
        // float32 storage: re-writing the parsed mesh is bit-identical.
        const std::string path2 = temp_path("meshfit_mesh2.ply");
        write_mesh_file(back, path2, MeshFormat::ply);
        CHECK(slurp(path) == slurp(path2));
    }

    SUBCASE("wireframe dump lists every edge") {
        const std::string path = temp_path("meshfit_wire.obj");
        write_wireframe_obj(mesh, path);
        const std::string text = slurp(path);
        std::size_t lines = 0, pos = 0;
        while ((pos = text.find("\nl ", pos)) != std::string::npos) {
            ++lines;
            ++pos;
        }
        CHECK(lines == static_cast<std::size_t>(mesh.edge_count()));
    }
}
