#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace meshfit {

// Seedable random generator with independent substreams.
//
// Substreams are derived as mt19937_64(splitmix64(seed ^ splitmix64(stream)))
// so that consumers of different streams never share draws. All value
// conversions are spelled out here (no std::*_distribution) because the
// standard does not pin those down across library implementations; the
// sequences below are reproducible everywhere mt19937_64 is.
//
// Stream assignments used by the scene generator:
//   0 = per-pixel gaussian depth noise
//   1 = outlier pixel selection
//   2 = outlier replacement values
//   3 = invalid pixel selection
//   4 = landmark grid jitter
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : gen_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull))) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n > 0. Modulo bias is negligible for the
    // small ranges used here and keeps the mapping portable.
    std::uint64_t uniform_index(std::uint64_t n) { return gen_() % n; }

    // Standard normal via Box-Muller (pairs cached).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace meshfit
