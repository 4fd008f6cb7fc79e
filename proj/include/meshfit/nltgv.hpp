#pragma once

#include <array>
#include <span>
#include <vector>

#include "meshfit/mesh2d.hpp"

namespace meshfit {

// The per-edge smoothness operator. Its three outputs are the deviation
// from the plane through vertex i evaluated at vertex j, and the two
// differences of the plane gradients:
//   [ alpha * (xi_i - xi_j - <w_i, u_i - u_j>);
//     beta  * (w1_i - w1_j);
//     beta  * (w2_i - w2_j) ]
std::array<double, 3> apply_edge_op(const Edge& edge, const VertexState& vi,
                                    const VertexState& vj);

// Stacked operator over all edges in index order, reading state from the
// mesh vertices; output length 3 * |edges|.
std::vector<double> apply_edge_ops(const Mesh2D& mesh);

// Same, but with the primal state supplied as flat arrays (one entry per
// vertex), leaving the mesh untouched.
void apply_edge_ops_into(const Mesh2D& mesh, std::span<const double> xi,
                         std::span<const double> w1, std::span<const double> w2,
                         std::span<double> out);

// Per-vertex accumulations of the transpose. For q = (q1,q2,q3) on edge
// (i,j): vertex i gains (alpha*q1, alpha*(u1j-u1i)*q1 + beta*q2,
// alpha*(u2j-u2i)*q1 + beta*q3) and vertex j gains (-alpha*q1, -beta*q2,
// -beta*q3). Edges are accumulated in index order so the result is
// reproducible bit for bit.
struct VertexAccum {
    std::vector<double> xi; // one per vertex
    std::vector<double> w1;
    std::vector<double> w2;
};
VertexAccum apply_edge_ops_adjoint(const Mesh2D& mesh,
                                   std::span<const std::array<double, 3>> duals);
void apply_edge_ops_adjoint_into(const Mesh2D& mesh,
                                 std::span<const std::array<double, 3>> duals,
                                 std::span<double> out_xi, std::span<double> out_w1,
                                 std::span<double> out_w2);

// Sum over edges of the l1 norm of the edge operator output. Zero exactly
// when the inverse depth is one global affine function of u and every w
// equals its gradient.
double nltgv_energy(const Mesh2D& mesh);

} // namespace meshfit
