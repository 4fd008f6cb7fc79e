#include "meshfit/depth_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "meshfit/errors.hpp"

namespace meshfit {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_in(const std::string& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

float byteswap_f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u = ((u & 0xff000000u) >> 24) | ((u & 0x00ff0000u) >> 8) |
        ((u & 0x0000ff00u) << 8) | ((u & 0x000000ffu) << 24);
    std::memcpy(&v, &u, 4);
    return v;
}

constexpr bool host_little = (std::endian::native == std::endian::little);

void store_depth(DepthGrid& grid, int x, int y, double depth) {
    if (std::isfinite(depth) && depth > 0.0) {
        // Rounded reciprocals are not involutive; nudge to a neighbor whose
        // reciprocal reproduces the file value so own-output round trips
        // stay byte-identical.
        double xi = 1.0 / depth;
        if (1.0 / xi != depth) {
            const double up = std::nextafter(xi, std::numeric_limits<double>::infinity());
            const double down = std::nextafter(xi, 0.0);
            if (1.0 / up == depth) {
                xi = up;
            } else if (1.0 / down == depth) {
                xi = down;
            }
        }
        grid.set(x, y, xi);
    } else {
        grid.set_invalid(x, y);
    }
}

double depth_of(const DepthGrid& grid, int x, int y) {
    return grid.valid(x, y) ? 1.0 / grid.at(x, y) : 0.0;
}

DepthGrid read_pfm(const std::string& path) {
    std::ifstream in = open_in(path, true);
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if (!in || magic != "Pf" || w <= 0 || h <= 0 || scale == 0.0) {
        throw IoError(path + ": malformed PFM header");
    }
    in.get(); // single whitespace separating header and data
    const bool file_little = scale < 0.0;

    DepthGrid grid(w, h);
    std::vector<float> row(static_cast<std::size_t>(w));
    for (int y = h - 1; y >= 0; --y) { // scanlines are bottom-to-top
        in.read(reinterpret_cast<char*>(row.data()), 4 * static_cast<std::streamsize>(w));
        if (!in) throw IoError(path + ": truncated PFM data");
        for (int x = 0; x < w; ++x) {
            float v = row[x];
            if (file_little != host_little) v = byteswap_f32(v);
            store_depth(grid, x, y, static_cast<double>(v));
        }
    }
    return grid;
}

void write_pfm(const DepthGrid& grid, const std::string& path) {
    std::ofstream out = open_out(path, true);
    out << "Pf\n" << grid.width << " " << grid.height << "\n"
        << (host_little ? "-1.0" : "1.0") << "\n";
    std::vector<float> row(static_cast<std::size_t>(grid.width));
    for (int y = grid.height - 1; y >= 0; --y) {
        for (int x = 0; x < grid.width; ++x) {
            row[x] = static_cast<float>(depth_of(grid, x, y));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  4 * static_cast<std::streamsize>(grid.width));
    }
    if (!out) throw IoError("write failed: " + path);
}

DepthGrid read_pgm16(const std::string& path) {
    double scale = 0.0;
    {
        std::ifstream sc(path + ".scale");
        if (!sc) throw IoError(path + ".scale: missing required sidecar");
        sc >> scale;
        if (!sc || !(scale > 0.0)) throw IoError(path + ".scale: bad scale value");
    }
    std::ifstream in = open_in(path, true);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (!in || magic != "P5" || w <= 0 || h <= 0 || maxval != 65535) {
        throw IoError(path + ": malformed 16-bit PGM header");
    }
    in.get();

    DepthGrid grid(w, h);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw IoError(path + ": truncated PGM data");
        for (int x = 0; x < w; ++x) {
            const unsigned v = (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1];
            store_depth(grid, x, y, v == 0 ? 0.0 : v * scale);
        }
    }
    return grid;
}

void write_pgm16(const DepthGrid& grid, const std::string& path) {
    double max_depth = 0.0;
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            max_depth = std::max(max_depth, depth_of(grid, x, y));
        }
    }
    const double scale = max_depth > 0.0 ? max_depth / 65535.0 : 1.0;
    {
        std::ofstream sc = open_out(path + ".scale", false);
        sc << format_double(scale) << "\n";
    }
    std::ofstream out = open_out(path, true);
    out << "P5\n" << grid.width << " " << grid.height << "\n65535\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(grid.width) * 2);
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            const double depth = depth_of(grid, x, y);
            unsigned v = 0;
            if (depth > 0.0) {
                const long q = std::lround(depth / scale);
                v = static_cast<unsigned>(std::clamp(q, 1l, 65535l));
            }
            row[2 * x] = static_cast<std::uint8_t>(v >> 8);
            row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("write failed: " + path);
}

DepthGrid read_csv_depth(const std::string& path) {
    std::ifstream in = open_in(path, false);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError(path + ": bad number '" + cell + "' on line " +
                              std::to_string(rows.size() + 1));
            }
        }
        if (!rows.empty() && vals.size() != rows.front().size()) {
            throw IoError(path + ": ragged row on line " + std::to_string(rows.size() + 1));
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty() || rows.front().empty()) {
        throw IoError(path + ": empty depth CSV");
    }
    DepthGrid grid(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) store_depth(grid, x, y, rows[y][x]);
    }
    return grid;
}

void write_csv_depth(const DepthGrid& grid, const std::string& path) {
    std::ofstream out = open_out(path, false);
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            if (x) out << ",";
            out << format_double(depth_of(grid, x, y));
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace

DepthGrid read_depth(const std::string& path, DepthFormat kind) {
    switch (kind) {
        case DepthFormat::pfm: return read_pfm(path);
        case DepthFormat::pgm16: return read_pgm16(path);
        case DepthFormat::csv: return read_csv_depth(path);
    }
    throw IoError("unknown depth format");
}

void write_depth(const DepthGrid& grid, const std::string& path, DepthFormat kind) {
    switch (kind) {
        case DepthFormat::pfm: write_pfm(grid, path); return;
        case DepthFormat::pgm16: write_pgm16(grid, path); return;
        case DepthFormat::csv: write_csv_depth(grid, path); return;
    }
    throw IoError("unknown depth format");
}

DepthFormat depth_format_from_path(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "pfm") return DepthFormat::pfm;
    if (ext == "pgm") return DepthFormat::pgm16;
    if (ext == "csv") return DepthFormat::csv;
    throw IoError(path + ": cannot infer depth format from extension");
}

LandmarkReadResult read_landmarks(const std::string& path) {
    std::ifstream in = open_in(path, false);
    LandmarkReadResult result;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2 || cells.size() > 3) {
            throw IoError(path + ": line " + std::to_string(lineno) +
                          ": expected u1,u2[,depth]");
        }
        Landmark lm;
        try {
            lm.u.x = std::stod(cells[0]);
            lm.u.y = std::stod(cells[1]);
            if (cells.size() == 3) {
                const double depth = std::stod(cells[2]);
                if (!std::isfinite(depth) || depth <= 0.0) {
                    ++result.rejected;
                    continue;
                }
                lm.z = 1.0 / depth;
            }
        } catch (const std::exception&) {
            throw IoError(path + ": line " + std::to_string(lineno) + ": bad number");
        }
        if (!std::isfinite(lm.u.x) || !std::isfinite(lm.u.y)) {
            throw IoError(path + ": line " + std::to_string(lineno) + ": bad coordinates");
        }
        result.landmarks.push_back(lm);
    }
    return result;
}

void write_landmarks(std::span<const Landmark> landmarks, const std::string& path) {
    std::ofstream out = open_out(path, false);
    for (const Landmark& lm : landmarks) {
        out << format_double(lm.u.x) << "," << format_double(lm.u.y);
        if (lm.z) out << "," << format_double(1.0 / *lm.z);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

MeshFile back_project(const Mesh2D& mesh, const Intrinsics& k) {
    if (!(k.fx > 0.0) || !(k.fy > 0.0)) {
        throw std::invalid_argument("intrinsics must have positive focal lengths");
    }
    MeshFile out;
    out.vertices.reserve(mesh.vertices.size());
    for (const VertexState& v : mesh.vertices) {
        if (!(v.xi > 0.0)) {
            throw std::invalid_argument("vertex has nonpositive inverse depth");
        }
        const double z = 1.0 / v.xi;
        out.vertices.push_back({(v.u.x - k.cx) / k.fx * z, (v.u.y - k.cy) / k.fy * z, z});
    }
    out.faces = mesh.triangles;
    return out;
}

void write_mesh_file(const MeshFile& mesh, const std::string& path, MeshFormat kind) {
    if (kind == MeshFormat::obj) {
        std::ofstream out = open_out(path, false);
        for (const auto& v : mesh.vertices) {
            out << "v " << format_double(v[0]) << " " << format_double(v[1]) << " "
                << format_double(v[2]) << "\n";
        }
        for (const auto& f : mesh.faces) {
            out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
        }
        if (!out) throw IoError("write failed: " + path);
        return;
    }
    std::ofstream out = open_out(path, true);
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << mesh.vertices.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "element face " << mesh.faces.size() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    for (const auto& v : mesh.vertices) {
        float xyz[3] = {static_cast<float>(v[0]), static_cast<float>(v[1]),
                        static_cast<float>(v[2])};
        if constexpr (!host_little) {
            for (float& f : xyz) f = byteswap_f32(f);
        }
        out.write(reinterpret_cast<const char*>(xyz), 12);
    }
    for (const auto& f : mesh.faces) {
        const std::uint8_t n = 3;
        out.write(reinterpret_cast<const char*>(&n), 1);
        std::int32_t idx[3] = {f[0], f[1], f[2]};
        if constexpr (!host_little) {
            for (std::int32_t& i : idx) {
                i = static_cast<std::int32_t>(__builtin_bswap32(static_cast<std::uint32_t>(i)));
            }
        }
        out.write(reinterpret_cast<const char*>(idx), 12);
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_mesh(const Mesh2D& mesh, const Intrinsics& k, const std::string& path,
                MeshFormat kind) {
    write_mesh_file(back_project(mesh, k), path, kind);
}

MeshFile read_mesh(const std::string& path, MeshFormat kind) {
    MeshFile mesh;
    if (kind == MeshFormat::obj) {
        std::ifstream in = open_in(path, false);
        std::string line;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string tag;
            ss >> tag;
            if (tag == "v") {
                std::array<double, 3> v{};
                ss >> v[0] >> v[1] >> v[2];
                if (!ss) throw IoError(path + ": bad vertex record");
                mesh.vertices.push_back(v);
            } else if (tag == "f") {
                std::array<int, 3> f{};
                ss >> f[0] >> f[1] >> f[2];
                if (!ss) throw IoError(path + ": bad face record");
                mesh.faces.push_back({f[0] - 1, f[1] - 1, f[2] - 1});
            }
        }
        return mesh;
    }
    std::ifstream in = open_in(path, true);
    std::string line;
    std::size_t n_verts = 0, n_faces = 0;
    bool header_ok = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::stringstream ss(line);
        std::string tag, what;
        ss >> tag;
        if (tag == "element") {
            std::size_t count = 0;
            ss >> what >> count;
            if (what == "vertex") n_verts = count;
            if (what == "face") n_faces = count;
        } else if (tag == "end_header") {
            header_ok = true;
            break;
        }
    }
    if (!header_ok) throw IoError(path + ": malformed PLY header");
    mesh.vertices.resize(n_verts);
    for (auto& v : mesh.vertices) {
        float xyz[3];
        in.read(reinterpret_cast<char*>(xyz), 12);
        if (!in) throw IoError(path + ": truncated PLY vertices");
        if constexpr (!host_little) {
            for (float& f : xyz) f = byteswap_f32(f);
        }
        v = {xyz[0], xyz[1], xyz[2]};
    }
    mesh.faces.resize(n_faces);
    for (auto& f : mesh.faces) {
        std::uint8_t n = 0;
        in.read(reinterpret_cast<char*>(&n), 1);
        std::int32_t idx[3];
        in.read(reinterpret_cast<char*>(idx), 12);
        if (!in || n != 3) throw IoError(path + ": unsupported PLY face");
        if constexpr (!host_little) {
            for (std::int32_t& i : idx) {
                i = static_cast<std::int32_t>(__builtin_bswap32(static_cast<std::uint32_t>(i)));
            }
        }
        f = {idx[0], idx[1], idx[2]};
    }
    return mesh;
}

void write_wireframe_obj(const Mesh2D& mesh, const std::string& path) {
    std::ofstream out = open_out(path, false);
    for (const VertexState& v : mesh.vertices) {
        out << "v " << format_double(v.u.x) << " " << format_double(v.u.y) << " 0\n";
    }
    for (const Edge& e : mesh.edges) {
        out << "l " << e.i + 1 << " " << e.j + 1 << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace meshfit
