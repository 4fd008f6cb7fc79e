#include "meshfit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "meshfit/rng.hpp"

namespace meshfit {

namespace {

void validate(const SceneSpec& spec) {
    if (spec.width < 2 || spec.height < 2) {
        throw std::invalid_argument("scene size must be at least 2x2");
    }
    if (spec.planes.empty()) {
        throw std::invalid_argument("scene needs at least one plane");
    }
    if (spec.noise_sigma < 0.0) {
        throw std::invalid_argument("noise_sigma must be nonnegative");
    }
    auto frac_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!frac_ok(spec.outlier_frac) || !frac_ok(spec.invalid_frac)) {
        throw std::invalid_argument("fractions must lie in [0, 1]");
    }
    if (spec.outlier_frac > 0.0 &&
        !(spec.outlier_lo < spec.outlier_hi && spec.outlier_lo > 0.0)) {
        throw std::invalid_argument("outlier range must satisfy 0 < lo < hi");
    }
    if (spec.landmark_spacing < 0.0) {
        throw std::invalid_argument("landmark_spacing must be nonnegative");
    }
}

double truth_at(const SceneSpec& spec, double u1, double u2) {
    for (const ScenePlane& p : spec.planes) {
        if (p.region.contains(u1, u2)) return p.eval(u1, u2);
    }
    throw std::invalid_argument("scene regions do not cover pixel (" +
                                std::to_string(u1) + ", " + std::to_string(u2) + ")");
}

// First k entries of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> choose(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace

SynthScene generate(const SceneSpec& spec) {
    validate(spec);
    const std::size_t n = static_cast<std::size_t>(spec.width) * spec.height;

    SynthScene scene;
    scene.truth = DepthGrid(spec.width, spec.height);
    scene.observed = DepthGrid(spec.width, spec.height);

    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const double t = truth_at(spec, x, y);
            if (!(t > 0.0) || !std::isfinite(t)) {
                throw std::invalid_argument("scene produces nonpositive inverse depth");
            }
            scene.truth.set(x, y, t);
        }
    }

    // Stream 0: per-pixel noise, raster order, redrawn while nonpositive.
    Rng noise(spec.seed, 0);
    for (std::size_t k = 0; k < n; ++k) {
        double v = scene.truth.values[k];
        if (spec.noise_sigma > 0.0) {
            double candidate = v + spec.noise_sigma * noise.gaussian();
            while (!(candidate > 0.0)) {
                candidate = v + spec.noise_sigma * noise.gaussian();
            }
            v = candidate;
        }
        scene.observed.values[k] = v;
        scene.observed.mask[k] = 1;
    }

    // Stream 1/2: outlier positions and replacement values.
    const std::size_t n_out =
        static_cast<std::size_t>(std::llround(spec.outlier_frac * static_cast<double>(n)));
    if (n_out > 0) {
        Rng pos(spec.seed, 1);
        Rng val(spec.seed, 2);
        for (std::size_t k : choose(n, n_out, pos)) {
            scene.observed.values[k] = val.uniform(spec.outlier_lo, spec.outlier_hi);
        }
    }

    // Stream 3: invalid pixels.
    const std::size_t n_inv =
        static_cast<std::size_t>(std::llround(spec.invalid_frac * static_cast<double>(n)));
    if (n_inv > 0) {
        Rng pos(spec.seed, 3);
        for (std::size_t k : choose(n, n_inv, pos)) {
            scene.observed.values[k] = 0.0;
            scene.observed.mask[k] = 0;
        }
    }

    // Stream 4: landmark jitter, up to a quarter spacing in each axis.
    if (spec.landmark_spacing > 0.0) {
        Rng jitter(spec.seed, 4);
        const double s = spec.landmark_spacing;
        for (double gy = 0.5 * s; gy < spec.height - 1; gy += s) {
            for (double gx = 0.5 * s; gx < spec.width - 1; gx += s) {
                const double u1 = std::clamp(gx + jitter.uniform(-0.25 * s, 0.25 * s),
                                             0.0, spec.width - 1.0);
                const double u2 = std::clamp(gy + jitter.uniform(-0.25 * s, 0.25 * s),
                                             0.0, spec.height - 1.0);
                Landmark lm;
                lm.u = {u1, u2};
                lm.z = truth_at(spec, u1, u2);
                scene.landmarks.push_back(lm);
            }
        }
    }
    return scene;
}

OracleResult oracle_minimize(const Mesh2D& mesh, const SparseInterpolator& A,
                             std::span<const double> b, double lambda,
                             const GridSpec& grid) {
    const int nv = mesh.vertex_count();
    if (nv > 3) {
        throw std::invalid_argument("oracle scale exceeded: " + std::to_string(nv) +
                                    " free variables");
    }
    if (nv == 0) {
        throw std::invalid_argument("oracle needs at least one vertex");
    }
    if (!(grid.step > 0.0) || !(grid.hi > grid.lo)) {
        throw std::invalid_argument("bad oracle grid");
    }
    const long steps = std::lround((grid.hi - grid.lo) / grid.step);
    const long npts = steps + 1;
    auto value = [&](long k) { return grid.lo + grid.step * static_cast<double>(k); };

    // Flat copies of the loss ingredients so an evaluation is a few flops.
    struct EdgeTerm {
        int i, j;
        double alpha, beta, du1, du2, wi1, wi2, wj1, wj2;
    };
    std::vector<EdgeTerm> eterms;
    eterms.reserve(mesh.edges.size());
    for (const Edge& e : mesh.edges) {
        const VertexState& vi = mesh.vertices[e.i];
        const VertexState& vj = mesh.vertices[e.j];
        eterms.push_back({e.i, e.j, e.alpha, e.beta, vi.u.x - vj.u.x,
                          vi.u.y - vj.u.y, vi.w.x, vi.w.y, vj.w.x, vj.w.y});
    }
    std::vector<double> zs(nv, 0.0);
    std::vector<char> has_z(nv, 0);
    for (int v = 0; v < nv; ++v) {
        if (mesh.vertices[v].z) {
            zs[v] = *mesh.vertices[v].z;
            has_z[v] = 1;
        }
    }

    auto eval = [&](const double* xi) {
        double total = 0.0;
        for (const EdgeTerm& t : eterms) {
            total += std::abs(t.alpha * (xi[t.i] - xi[t.j] -
                                         (t.wi1 * t.du1 + t.wi2 * t.du2))) +
                     std::abs(t.beta * (t.wi1 - t.wj1)) +
                     std::abs(t.beta * (t.wi2 - t.wj2));
        }
        double data = 0.0;
        for (int r = 0; r < A.n_rows(); ++r) {
            const auto& vi = A.vertex_idx[r];
            const auto& w = A.weight[r];
            data += std::abs(w[0] * xi[vi[0]] + w[1] * xi[vi[1]] +
                             w[2] * xi[vi[2]] - b[r]);
        }
        for (int v = 0; v < nv; ++v) {
            if (has_z[v]) data += std::abs(xi[v] - zs[v]);
        }
        return total + lambda * data;
    };

    // Grid minimum along the last axis for fixed leading coordinates.
    // Valid as ternary search because the loss is convex along each axis;
    // equal probe values bracket the minimizer.
    double xi[3] = {0.0, 0.0, 0.0};
    auto min_last_axis = [&](int axis) {
        long lo = 0, hi = npts - 1;
        auto probe = [&](long k) {
            xi[axis] = value(k);
            return eval(xi);
        };
        while (hi - lo >= 3) {
            const long m1 = lo + (hi - lo) / 3;
            const long m2 = hi - (hi - lo) / 3;
            const double f1 = probe(m1);
            const double f2 = probe(m2);
            if (f1 < f2) {
                hi = m2 - 1;
            } else if (f1 > f2) {
                lo = m1 + 1;
            } else {
                lo = m1;
                hi = m2;
            }
        }
        double best = probe(lo);
        long best_k = lo;
        for (long k = lo + 1; k <= hi; ++k) {
            const double f = probe(k);
            if (f < best) {
                best = f;
                best_k = k;
            }
        }
        xi[axis] = value(best_k);
        return best;
    };

    OracleResult result;
    result.energy = std::numeric_limits<double>::infinity();
    std::vector<double> best_xi(nv);

    if (nv == 1) {
        result.energy = min_last_axis(0);
        best_xi[0] = xi[0];
    } else if (nv == 2) {
        for (long k0 = 0; k0 < npts; ++k0) {
            xi[0] = value(k0);
            const double f = min_last_axis(1);
            if (f < result.energy) {
                result.energy = f;
                best_xi[0] = xi[0];
                best_xi[1] = xi[1];
            }
        }
    } else {
        for (long k0 = 0; k0 < npts; ++k0) {
            xi[0] = value(k0);
            for (long k1 = 0; k1 < npts; ++k1) {
                xi[1] = value(k1);
                const double f = min_last_axis(2);
                if (f < result.energy) {
                    result.energy = f;
                    best_xi[0] = xi[0];
                    best_xi[1] = xi[1];
                    best_xi[2] = xi[2];
                }
            }
        }
    }
    result.xi = std::move(best_xi);
    return result;
}

} // namespace meshfit
