#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "meshfit/barycentric.hpp"
#include "meshfit/mesh2d.hpp"

namespace meshfit {

// Files store metric depth in meters; grids hold inverse depth. Readers
// convert on load and mask nonpositive or nonfinite samples invalid.
enum class DepthFormat { pfm, pgm16, csv };

// PFM: float32 scanlines bottom-to-top, header scale sign encoding
// endianness. PGM16: 16-bit big-endian with a required "<path>.scale"
// sidecar giving meters per unit (sample 0 means invalid). CSV: H lines
// of W comma-separated depths.
DepthGrid read_depth(const std::string& path, DepthFormat kind);
void write_depth(const DepthGrid& grid, const std::string& path, DepthFormat kind);

// Guess the format from the file extension; throws IoError for unknown
// extensions.
DepthFormat depth_format_from_path(const std::string& path);

struct LandmarkReadResult {
    std::vector<Landmark> landmarks;
    int rejected = 0; // lines with nonpositive depth
};

// CSV lines "u1,u2[,depth_m]". The depth column is optional; when present
// it is converted to inverse depth. Malformed lines raise IoError with
// the line number; nonpositive depths are dropped and counted.
LandmarkReadResult read_landmarks(const std::string& path);
void write_landmarks(std::span<const Landmark> landmarks, const std::string& path);

struct Intrinsics {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
};

enum class MeshFormat { obj, ply };

struct MeshFile {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> faces;
};

// Pinhole back-projection of the fitted mesh: Z = 1/xi,
// X = (u1-cx)/fx * Z, Y = (u2-cy)/fy * Z. Throws on nonpositive xi.
MeshFile back_project(const Mesh2D& mesh, const Intrinsics& k);

// OBJ is ASCII v/f records; PLY is binary little-endian with float32
// vertices and int32 face indices.
void write_mesh_file(const MeshFile& mesh, const std::string& path, MeshFormat kind);
void write_mesh(const Mesh2D& mesh, const Intrinsics& k, const std::string& path,
                MeshFormat kind);
MeshFile read_mesh(const std::string& path, MeshFormat kind);

// Image-plane debug dump: vertices at (u1, u2, 0) and one OBJ line record
// per mesh edge.
void write_wireframe_obj(const Mesh2D& mesh, const std::string& path);

} // namespace meshfit
