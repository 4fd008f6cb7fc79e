#include "meshfit/nltgv.hpp"

#include <cmath>
#include <stdexcept>

namespace meshfit {

std::array<double, 3> apply_edge_op(const Edge& edge, const VertexState& vi,
                                    const VertexState& vj) {
    const Vec2 du = vi.u - vj.u;
    return {edge.alpha * (vi.xi - vj.xi - (vi.w.x * du.x + vi.w.y * du.y)),
            edge.beta * (vi.w.x - vj.w.x),
            edge.beta * (vi.w.y - vj.w.y)};
}

std::vector<double> apply_edge_ops(const Mesh2D& mesh) {
    std::vector<double> out(3 * mesh.edges.size());
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const Edge& edge = mesh.edges[e];
        const std::array<double, 3> r =
            apply_edge_op(edge, mesh.vertices[edge.i], mesh.vertices[edge.j]);
        out[3 * e] = r[0];
        out[3 * e + 1] = r[1];
        out[3 * e + 2] = r[2];
    }
    return out;
}

void apply_edge_ops_into(const Mesh2D& mesh, std::span<const double> xi,
                         std::span<const double> w1, std::span<const double> w2,
                         std::span<double> out) {
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const Edge& edge = mesh.edges[e];
        const Vec2 du = mesh.vertices[edge.i].u - mesh.vertices[edge.j].u;
        const int i = edge.i, j = edge.j;
        out[3 * e] = edge.alpha * (xi[i] - xi[j] - (w1[i] * du.x + w2[i] * du.y));
        out[3 * e + 1] = edge.beta * (w1[i] - w1[j]);
        out[3 * e + 2] = edge.beta * (w2[i] - w2[j]);
    }
}

VertexAccum apply_edge_ops_adjoint(const Mesh2D& mesh,
                                   std::span<const std::array<double, 3>> duals) {
    VertexAccum acc;
    acc.xi.assign(mesh.vertices.size(), 0.0);
    acc.w1.assign(mesh.vertices.size(), 0.0);
    acc.w2.assign(mesh.vertices.size(), 0.0);
    apply_edge_ops_adjoint_into(mesh, duals, acc.xi, acc.w1, acc.w2);
    return acc;
}

void apply_edge_ops_adjoint_into(const Mesh2D& mesh,
                                 std::span<const std::array<double, 3>> duals,
                                 std::span<double> out_xi, std::span<double> out_w1,
                                 std::span<double> out_w2) {
    if (duals.size() != mesh.edges.size()) {
        throw std::invalid_argument("edge dual count mismatch");
    }
    std::fill(out_xi.begin(), out_xi.end(), 0.0);
    std::fill(out_w1.begin(), out_w1.end(), 0.0);
    std::fill(out_w2.begin(), out_w2.end(), 0.0);
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const Edge& edge = mesh.edges[e];
        const std::array<double, 3>& q = duals[e];
        const Vec2 duj = mesh.vertices[edge.j].u - mesh.vertices[edge.i].u;
        out_xi[edge.i] += edge.alpha * q[0];
        out_w1[edge.i] += edge.alpha * duj.x * q[0] + edge.beta * q[1];
        out_w2[edge.i] += edge.alpha * duj.y * q[0] + edge.beta * q[2];
        out_xi[edge.j] -= edge.alpha * q[0];
        out_w1[edge.j] -= edge.beta * q[1];
        out_w2[edge.j] -= edge.beta * q[2];
    }
}

double nltgv_energy(const Mesh2D& mesh) {
    double total = 0.0;
    for (const Edge& edge : mesh.edges) {
        const std::array<double, 3> r =
            apply_edge_op(edge, mesh.vertices[edge.i], mesh.vertices[edge.j]);
        total += std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]);
    }
    return total;
}

} // namespace meshfit
