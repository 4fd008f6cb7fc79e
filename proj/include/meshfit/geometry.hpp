#pragma once

#include <array>
#include <cmath>

namespace meshfit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double dist2(Vec2 a, Vec2 b) { return dot(a - b, a - b); }

// Twice the signed area of triangle (a,b,c); positive for counter-clockwise.
inline double orient2d(Vec2 a, Vec2 b, Vec2 c) {
    return cross(b - a, c - a);
}

// Incircle determinant: positive iff d lies strictly inside the circumcircle
// of the counter-clockwise triangle (a,b,c). Exact for small integer
// coordinates since all intermediates stay below 2^53.
inline double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad2 = adx * adx + ady * ady;
    const double bd2 = bdx * bdx + bdy * bdy;
    const double cd2 = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) +
           ad2 * (bdx * cdy - cdx * bdy);
}

// Barycentric coordinates of p with respect to triangle (a,b,c).
// Weights sum to 1 by construction (w0 computed as the complement).
inline std::array<double, 3> barycentric(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    const double area = orient2d(a, b, c);
    const double w1 = orient2d(a, p, c) / area;
    const double w2 = orient2d(a, b, p) / area;
    return {1.0 - w1 - w2, w1, w2};
}

} // namespace meshfit
