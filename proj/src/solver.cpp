#include "meshfit/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "meshfit/errors.hpp"
#include "meshfit/nltgv.hpp"
#include "meshfit/rng.hpp"

namespace meshfit {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

void resolvent_fstar(std::span<std::array<double, 3>> q_tilde,
                     std::span<double> p_tilde, double lambda,
                     std::span<const double> b) {
    for (auto& q : q_tilde) {
        for (double& qi : q) qi /= std::max(1.0, std::abs(qi));
    }
    for (std::size_t j = 0; j < p_tilde.size(); ++j) {
        const double shifted = p_tilde[j] - lambda * b[j];
        p_tilde[j] = shifted / std::max(1.0, std::abs(shifted));
    }
}

double resolvent_g(double xi_tilde, std::optional<double> z, double tau,
                   double lambda) {
    if (!z) return xi_tilde;
    const double width = tau * lambda;
    const double diff = xi_tilde - *z;
    if (diff > width) return xi_tilde - width;
    if (diff < -width) return xi_tilde + width;
    return *z;
}

double estimate_operator_norm(const Mesh2D& mesh, const SparseInterpolator& A,
                              double lambda) {
    const int nv = mesh.vertex_count();
    const std::size_t ne = mesh.edges.size();
    if (ne == 0 && (A.n_rows() == 0 || lambda == 0.0)) {
        throw SolverError("zero operator: no edges and no weighted depth rows");
    }

    std::vector<double> xi(nv), w1(nv), w2(nv);
    Rng rng(0x5eed, 7);
    for (int v = 0; v < nv; ++v) {
        xi[v] = rng.uniform(-1.0, 1.0);
        w1[v] = rng.uniform(-1.0, 1.0);
        w2[v] = rng.uniform(-1.0, 1.0);
    }

    std::vector<double> Dx(3 * ne), Ax(A.n_rows());
    std::vector<std::array<double, 3>> q(ne);
    std::vector<double> adj_xi(nv), adj_w1(nv), adj_w2(nv), Ap(nv);

    double eig = 0.0;
    for (int it = 0; it < 50; ++it) {
        // y = K x
        apply_edge_ops_into(mesh, xi, w1, w2, Dx);
        A.apply_into(xi, Ax);
        for (double& a : Ax) a *= lambda;
        // x' = K* y
        for (std::size_t e = 0; e < ne; ++e) {
            q[e] = {Dx[3 * e], Dx[3 * e + 1], Dx[3 * e + 2]};
        }
        apply_edge_ops_adjoint_into(mesh, q, adj_xi, adj_w1, adj_w2);
        A.apply_adjoint_into(Ax, Ap);
        double sq = 0.0;
        for (int v = 0; v < nv; ++v) {
            adj_xi[v] += lambda * Ap[v];
            sq += adj_xi[v] * adj_xi[v] + adj_w1[v] * adj_w1[v] + adj_w2[v] * adj_w2[v];
        }
        const double nrm = std::sqrt(sq);
        if (nrm == 0.0) {
            throw SolverError("zero operator: power iteration collapsed");
        }
        const double prev = eig;
        eig = nrm; // |K*K x| with |x| = 1
        for (int v = 0; v < nv; ++v) {
            xi[v] = adj_xi[v] / nrm;
            w1[v] = adj_w1[v] / nrm;
            w2[v] = adj_w2[v] / nrm;
        }
        if (it > 0 && std::abs(eig - prev) < 1e-6 * eig) break;
    }
    return 1.05 * std::sqrt(eig);
}

PrimalDualIteration::PrimalDualIteration(const Mesh2D& mesh,
                                         const SparseInterpolator& A,
                                         std::vector<double> b, double lambda,
                                         double sigma, double tau, double theta,
                                         bool freeze_w)
    : mesh_(mesh), A_(A), b_(std::move(b)), lambda_(lambda), sigma_(sigma),
      tau_(tau), theta_(theta), freeze_w_(freeze_w) {
    if (static_cast<int>(b_.size()) != A_.n_rows()) {
        throw std::invalid_argument("data vector length does not match interpolator rows");
    }
    const int nv = mesh.vertex_count();
    xi_.assign(nv, 0.0);
    w1_.assign(nv, 0.0);
    w2_.assign(nv, 0.0);
    reset_from_mesh();
    Dx_.assign(3 * mesh.edges.size(), 0.0);
    Ax_.assign(b_.size(), 0.0);
    adj_xi_.assign(nv, 0.0);
    adj_w1_.assign(nv, 0.0);
    adj_w2_.assign(nv, 0.0);
    Ap_.assign(nv, 0.0);
}

void PrimalDualIteration::reset_from_mesh() {
    const int nv = mesh_.vertex_count();
    for (int v = 0; v < nv; ++v) {
        xi_[v] = mesh_.vertices[v].xi;
        w1_[v] = mesh_.vertices[v].w.x;
        w2_[v] = mesh_.vertices[v].w.y;
    }
    xbar_xi_ = xi_;
    xbar_w1_ = w1_;
    xbar_w2_ = w2_;
    duals_.q.assign(mesh_.edges.size(), {0.0, 0.0, 0.0});
    duals_.p.assign(b_.size(), 0.0);
    iteration_ = 0;
}

void PrimalDualIteration::set_state(std::span<const double> xi,
                                    std::span<const double> w1,
                                    std::span<const double> w2) {
    std::copy(xi.begin(), xi.end(), xi_.begin());
    std::copy(w1.begin(), w1.end(), w1_.begin());
    std::copy(w2.begin(), w2.end(), w2_.begin());
    xbar_xi_ = xi_;
    xbar_w1_ = w1_;
    xbar_w2_ = w2_;
}

void PrimalDualIteration::write_back(Mesh2D& mesh) const {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        mesh.vertices[v].xi = xi_[v];
        mesh.vertices[v].w = {w1_[v], w2_[v]};
    }
}

void PrimalDualIteration::step() {
    const auto t0 = Clock::now();

    // Dual ascent on the shadow state: q <- proj(q + sigma * D xbar),
    // p <- proj(p + sigma*lambda*(A xbar_xi) - sigma*lambda*b). The offset
    // carries the step size because the resolvent is taken of sigma*F*.
    apply_edge_ops_into(mesh_, xbar_xi_, xbar_w1_, xbar_w2_, Dx_);
    for (std::size_t e = 0; e < duals_.q.size(); ++e) {
        for (int k = 0; k < 3; ++k) {
            const double qt = duals_.q[e][k] + sigma_ * Dx_[3 * e + k];
            duals_.q[e][k] = qt / std::max(1.0, std::abs(qt));
        }
    }
    A_.apply_into(xbar_xi_, Ax_);
    const double sl = sigma_ * lambda_;
    for (std::size_t d = 0; d < duals_.p.size(); ++d) {
        const double pt = duals_.p[d] + sl * Ax_[d] - sl * b_[d];
        duals_.p[d] = pt / std::max(1.0, std::abs(pt));
    }
    dual_ms_ = ms_since(t0);

    // Primal descent with extragradient bookkeeping.
    apply_edge_ops_adjoint_into(mesh_, duals_.q, adj_xi_, adj_w1_, adj_w2_);
    A_.apply_adjoint_into(duals_.p, Ap_);
    const double tl = tau_ * lambda_;
    for (std::size_t v = 0; v < xi_.size(); ++v) {
        const double xi_prev = xi_[v];
        const double xi_tilde = xi_[v] - tau_ * adj_xi_[v] - tl * Ap_[v];
        const double xi_new =
            resolvent_g(xi_tilde, mesh_.vertices[v].z, tau_, lambda_);
        xi_[v] = xi_new;
        xbar_xi_[v] = xi_new + theta_ * (xi_new - xi_prev);
        if (!freeze_w_) {
            const double w1_prev = w1_[v];
            const double w2_prev = w2_[v];
            w1_[v] -= tau_ * adj_w1_[v];
            w2_[v] -= tau_ * adj_w2_[v];
            xbar_w1_[v] = w1_[v] + theta_ * (w1_[v] - w1_prev);
            xbar_w2_[v] = w2_[v] + theta_ * (w2_[v] - w2_prev);
        }
    }
    ++iteration_;
    check_finite();
}

void PrimalDualIteration::check_finite() const {
    for (std::size_t v = 0; v < xi_.size(); ++v) {
        if (!std::isfinite(xi_[v]) || !std::isfinite(w1_[v]) ||
            !std::isfinite(w2_[v])) {
            throw SolverError("divergence at iteration " +
                              std::to_string(iteration_) + " (vertex " +
                              std::to_string(v) + ")");
        }
    }
}

EnergyBreakdown energy(const Mesh2D& mesh, const SparseInterpolator& A,
                       std::span<const double> b, double lambda) {
    EnergyBreakdown e;
    e.smooth = nltgv_energy(mesh);
    for (int r = 0; r < A.n_rows(); ++r) {
        const auto& vi = A.vertex_idx[r];
        const auto& w = A.weight[r];
        const double est = w[0] * mesh.vertices[vi[0]].xi +
                           w[1] * mesh.vertices[vi[1]].xi +
                           w[2] * mesh.vertices[vi[2]].xi;
        e.depth += std::abs(est - b[r]);
    }
    for (const VertexState& v : mesh.vertices) {
        if (v.z) e.tracking += std::abs(v.xi - *v.z);
    }
    e.total = e.smooth + lambda * (e.depth + e.tracking);
    return e;
}

namespace {

// Warm start: landmark z where present, otherwise the median of the valid
// measurements under the vertex's incident triangles, otherwise the
// global median of b.
void initialize_state(Mesh2D& mesh, const SparseInterpolator& A,
                      const std::vector<double>& b) {
    const int nv = mesh.vertex_count();
    std::vector<std::vector<double>> support(nv);
    for (int r = 0; r < A.n_rows(); ++r) {
        for (int k = 0; k < 3; ++k) support[A.vertex_idx[r][k]].push_back(b[r]);
    }
    const double global = median(b);
    for (int v = 0; v < nv; ++v) {
        VertexState& vs = mesh.vertices[v];
        if (vs.z) {
            vs.xi = *vs.z;
        } else if (!support[v].empty()) {
            vs.xi = median(support[v]);
        } else if (!b.empty()) {
            vs.xi = global;
        } else {
            throw SolverError("empty problem: vertex " + std::to_string(v) +
                              " has no depth support and no tracked depth");
        }
        vs.w = {0.0, 0.0};
    }
}

} // namespace

SolveDiagnostics solve_prepared(Mesh2D& mesh, const SparseInterpolator& A,
                                const std::vector<double>& b,
                                const SolverConfig& config) {
    if (config.lambda < 0.0 || config.theta < 0.0 || config.theta > 1.0 ||
        config.max_iters <= 0) {
        throw std::invalid_argument("invalid solver configuration");
    }
    if (b.empty()) {
        for (const VertexState& v : mesh.vertices) {
            if (!v.z) throw SolverError("empty problem: no valid pixels and untracked vertices");
        }
    }

    const auto t0 = Clock::now();
    SolveDiagnostics diag;

    initialize_state(mesh, A, b);

    double sigma = config.sigma;
    double tau = config.tau;
    if (config.auto_steps) {
        diag.operator_norm = estimate_operator_norm(mesh, A, config.lambda);
        sigma = tau = 1.0 / diag.operator_norm;
    } else if (sigma <= 0.0 || tau <= 0.0) {
        throw std::invalid_argument("explicit steps require sigma > 0 and tau > 0");
    }
    diag.sigma = sigma;
    diag.tau = tau;

    PrimalDualIteration it(mesh, A, b, config.lambda, sigma, tau, config.theta,
                           config.freeze_w);

    EnergyBreakdown e0 = energy(mesh, A, b, config.lambda);
    diag.trajectory.emplace_back(0, e0.total);
    double window_energy = e0.total;

    double dual_ms_total = 0.0;
    int n = 0;
    while (n < config.max_iters) {
        it.step();
        dual_ms_total += it.last_dual_ms();
        ++n;
        if (n % 10 == 0 || n == config.max_iters) {
            it.write_back(mesh);
            const EnergyBreakdown e = energy(mesh, A, b, config.lambda);
            diag.trajectory.emplace_back(n, e.total);
            if (n % 10 == 0 && config.energy_rel_tol > 0.0) {
                const double scale = std::max(std::abs(window_energy), 1e-300);
                if (std::abs(e.total - window_energy) / scale < config.energy_rel_tol) {
                    window_energy = e.total;
                    break;
                }
                window_energy = e.total;
            }
        }
    }

    it.write_back(mesh);
    diag.iterations = n;
    diag.dual_update_ms_avg = n > 0 ? dual_ms_total / n : 0.0;
    diag.energy = energy(mesh, A, b, config.lambda);
    if (diag.trajectory.back().first != n) {
        diag.trajectory.emplace_back(n, diag.energy.total);
    }
    diag.wall_ms = ms_since(t0);
    return diag;
}

SolveDiagnostics solve(Mesh2D& mesh, const DepthGrid& grid,
                       const SolverConfig& config) {
    const SparseInterpolator A = build_interpolator(mesh, grid);
    const std::vector<double> b = valid_values(grid);
    return solve_prepared(mesh, A, b, config);
}

std::vector<double> ls_fit(const Mesh2D& mesh, const SparseInterpolator& A,
                           std::span<const double> b) {
    const int nv = mesh.vertex_count();
    std::vector<double> col_mass(nv, 0.0);
    for (int r = 0; r < A.n_rows(); ++r) {
        for (int k = 0; k < 3; ++k) {
            col_mass[A.vertex_idx[r][k]] += std::abs(A.weight[r][k]);
        }
    }
    for (int v = 0; v < nv; ++v) {
        if (col_mass[v] == 0.0) {
            throw SolverError("vertex " + std::to_string(v) +
                              " has no supporting pixels; normal equations singular");
        }
    }

    // CG on A^T A x = A^T b.
    std::vector<double> x(nv, 0.0), r(nv), pdir(nv), Ap(nv);
    std::vector<double> row_tmp(A.n_rows());
    A.apply_adjoint_into(b, r); // r = A^T b - A^T A * 0
    pdir = r;
    const double rhs_norm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    if (rhs_norm == 0.0) return x;

    double rr = rhs_norm * rhs_norm;
    const int max_cg = std::max(200, 10 * nv);
    for (int it = 0; it < max_cg; ++it) {
        A.apply_into(pdir, row_tmp);
        A.apply_adjoint_into(row_tmp, Ap);
        const double pAp = std::inner_product(pdir.begin(), pdir.end(), Ap.begin(), 0.0);
        if (pAp <= 0.0) {
            throw SolverError("normal equations not positive definite");
        }
        const double alpha = rr / pAp;
        for (int v = 0; v < nv; ++v) {
            x[v] += alpha * pdir[v];
            r[v] -= alpha * Ap[v];
        }
        const double rr_new = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
        if (std::sqrt(rr_new) <= 1e-8 * rhs_norm) break;
        const double beta = rr_new / rr;
        rr = rr_new;
        for (int v = 0; v < nv; ++v) pdir[v] = r[v] + beta * pdir[v];
    }
    return x;
}

std::pair<double, double> duality_gap_check(std::span<const double> xi,
                                            const SparseInterpolator& A,
                                            std::span<const double> b) {
    std::vector<double> res(A.n_rows());
    A.apply_into(xi, res);
    double lhs = 0.0, rhs = 0.0;
    for (int d = 0; d < A.n_rows(); ++d) {
        const double r = res[d] - b[d];
        lhs += std::abs(r);
        const double sign = (r > 0.0) ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
        rhs += r * sign;
    }
    return {lhs, rhs};
}

} // namespace meshfit
