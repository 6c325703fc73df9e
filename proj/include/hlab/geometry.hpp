#ifndef HLAB_GEOMETRY_HPP
#define HLAB_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstddef>

namespace hlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Reduce a coordinate into [0,1). Exact for dyadic inputs shifted by integers.
inline double wrap_unit(double t) {
    double w = t - std::floor(t);
    return (w >= 1.0) ? 0.0 : w;
}

inline Vec2 wrap_unit(const Vec2& p) { return {wrap_unit(p.x), wrap_unit(p.y)}; }

/// Distance from point p to segment [a,b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 == 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return (p - (a + ab * t)).norm();
}

// ----------------------------------------------------------------------------
// Eigenvalue range of a small symmetric matrix (n <= 4) by cyclic Jacobi.
// Used for ellipticity witnesses; not performance critical.
// ----------------------------------------------------------------------------
struct EigRange {
    double min = 0.0;
    double max = 0.0;
};

inline EigRange symmetric_eig_range(const double* a_in, int n) {
    std::array<double, 16> a{};
    for (int i = 0; i < n * n; ++i) a[static_cast<size_t>(i)] = a_in[i];
    auto at = [&](int r, int c) -> double& { return a[static_cast<size_t>(r * n + c)]; };

    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    EigRange r{at(0, 0), at(0, 0)};
    for (int i = 1; i < n; ++i) {
        r.min = std::min(r.min, at(i, i));
        r.max = std::max(r.max, at(i, i));
    }
    return r;
}

} // namespace hlab

#endif
