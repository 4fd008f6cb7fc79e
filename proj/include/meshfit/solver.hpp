#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "meshfit/barycentric.hpp"
#include "meshfit/mesh2d.hpp"

namespace meshfit {

struct SolverConfig {
    double lambda = 0.5;        // data weight
    double sigma = 0.0;         // dual step (used when auto_steps is off)
    double tau = 0.0;           // primal step (used when auto_steps is off)
    double theta = 1.0;         // extragradient weight, in [0, 1]
    int max_iters = 200;
    double energy_rel_tol = 1e-5; // <= 0 disables early stopping (fixed budget)
    bool auto_steps = true;       // derive sigma = tau = 1/L from the operator norm
    bool freeze_w = false;        // keep plane gradients fixed (oracle comparisons)
};

// Duals of the stacked saddle problem: one 3-vector per edge, one scalar
// per valid pixel. Both live in unit l-infinity balls after projection.
struct DualState {
    std::vector<std::array<double, 3>> q;
    std::vector<double> p;
};

struct EnergyBreakdown {
    double total = 0.0;
    double smooth = 0.0;
    double depth = 0.0;
    double tracking = 0.0;
};

struct SolveDiagnostics {
    int iterations = 0;
    double wall_ms = 0.0;
    double dual_update_ms_avg = 0.0;
    double operator_norm = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
    EnergyBreakdown energy;
    std::vector<std::pair<int, double>> trajectory; // (iteration, total energy)
};

// Resolvent of the dual-side function: componentwise projection of the
// edge duals onto unit l-infinity balls, and for the pixel duals the same
// projection with the argument offset by lambda * b. Operates in place on
// the tilde values.
void resolvent_fstar(std::span<std::array<double, 3>> q_tilde,
                     std::span<double> p_tilde, double lambda,
                     std::span<const double> b);

// Resolvent of the tracking term: identity when the vertex has no tracked
// inverse depth, otherwise soft-thresholding of xi_tilde toward z with
// width tau * lambda.
double resolvent_g(double xi_tilde, std::optional<double> z, double tau,
                   double lambda);

// Largest singular value of the stacked operator K x = (D x, lambda * A
// x_xi), estimated by power iteration on K*K (50 iterations or relative
// change < 1e-6) and inflated by a 5% safety margin. Throws SolverError
// on a zero operator.
double estimate_operator_norm(const Mesh2D& mesh, const SparseInterpolator& A,
                              double lambda);

// One full primal-dual cycle with persistent extragradient shadow state.
// Construct once per problem; step() performs dual ascent, primal descent
// and the extragradient update, and throws SolverError("divergence ...")
// if any state entry stops being finite.
class PrimalDualIteration {
public:
    PrimalDualIteration(const Mesh2D& mesh, const SparseInterpolator& A,
                        std::vector<double> b, double lambda, double sigma,
                        double tau, double theta, bool freeze_w = false);

    // Loads xi/w from the mesh vertices and zeroes the duals.
    void reset_from_mesh();

    void step();

    int iteration() const { return iteration_; }
    std::span<const double> xi() const { return xi_; }
    std::span<const double> w1() const { return w1_; }
    std::span<const double> w2() const { return w2_; }
    const DualState& duals() const { return duals_; }
    DualState& duals() { return duals_; }
    double last_dual_ms() const { return dual_ms_; }

    void set_state(std::span<const double> xi, std::span<const double> w1,
                   std::span<const double> w2);
    void write_back(Mesh2D& mesh) const;

private:
    const Mesh2D& mesh_;
    const SparseInterpolator& A_;
    std::vector<double> b_;
    double lambda_, sigma_, tau_, theta_;
    bool freeze_w_;
    int iteration_ = 0;
    double dual_ms_ = 0.0;

    std::vector<double> xi_, w1_, w2_;
    std::vector<double> xbar_xi_, xbar_w1_, xbar_w2_;
    DualState duals_;
    // scratch
    std::vector<double> Dx_, Ax_, adj_xi_, adj_w1_, adj_w2_, Ap_;

    void check_finite() const;
};

// Loss of the current mesh state: smooth = sum of edge-operator l1 norms,
// depth = sum |a_d xi - b_d|, tracking = sum |xi_v - z_v| over landmark
// vertices; total = smooth + lambda * (depth + tracking).
EnergyBreakdown energy(const Mesh2D& mesh, const SparseInterpolator& A,
                       std::span<const double> b, double lambda);

// Full solve on a prepared operator: initializes the state, derives steps,
// iterates until the energy change over a 10-iteration window drops below
// the relative tolerance or the budget runs out, and writes the fitted
// state back into the mesh.
SolveDiagnostics solve_prepared(Mesh2D& mesh, const SparseInterpolator& A,
                                const std::vector<double>& b,
                                const SolverConfig& config);

// Convenience pipeline: build the interpolator from the grid, then
// solve_prepared.
SolveDiagnostics solve(Mesh2D& mesh, const DepthGrid& grid,
                       const SolverConfig& config);

// Least-squares baseline: minimizes |A xi - b|_2^2 by conjugate gradient
// on the normal equations to relative residual 1e-8. Throws SolverError
// naming the first vertex with no supporting pixels.
std::vector<double> ls_fit(const Mesh2D& mesh, const SparseInterpolator& A,
                           std::span<const double> b);

// Both sides of the l1 dual representation of the depth term:
// lhs = |A xi - b|_1, rhs = <A xi - b, sign(A xi - b)>.
std::pair<double, double> duality_gap_check(std::span<const double> xi,
                                            const SparseInterpolator& A,
                                            std::span<const double> b);

} // namespace meshfit
