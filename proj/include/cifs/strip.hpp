#pragma once

// Minimum-width strips ("minimax hyperplanes") of finite planar point sets.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "cifs/geometry.hpp"

namespace cifs {

/// The closed strip {z : |<z, normal> - offset| <= half_width}.
struct strip {
    point normal{1.0, 0.0};  // unit vector
    double offset = 0.0;
    double half_width = 0.0;

    double distance(point z) const {
        return std::abs(z.real() * normal.real() + z.imag() * normal.imag() - offset);
    }
};

namespace detail {

inline double cross(point o, point a, point b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

}  // namespace detail

/// Andrew's monotone chain; returns the hull counter-clockwise without
/// repeating the first vertex. Collinear boundary points are dropped.
inline std::vector<point> convex_hull(std::span<const point> pts) {
    std::vector<point> p(pts.begin(), pts.end());
    std::sort(p.begin(), p.end(), [](point a, point b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) {
        return p;
    }
    std::vector<point> hull(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p[i]) <= 0) {
            --k;
        }
        hull[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && detail::cross(hull[k - 2], hull[k - 1], p[i]) <= 0) {
            --k;
        }
        hull[k++] = p[i];
    }
    hull.resize(k - 1);
    return hull;
}

/// Exact minimum-width strip by rotating calipers over the hull edges. The
/// optimal strip always has one side flush with a hull edge.
inline strip min_width_strip(std::span<const point> pts) {
    strip best;
    if (pts.empty()) {
        return best;
    }
    const auto hull = convex_hull(pts);
    if (hull.size() == 1) {
        best.offset = hull[0].real();
        return best;
    }
    if (hull.size() == 2) {
        const point d = hull[1] - hull[0];
        best.normal = point{-d.imag(), d.real()} / std::abs(d);
        best.offset = hull[0].real() * best.normal.real() + hull[0].imag() * best.normal.imag();
        return best;
    }
    const std::size_t n = hull.size();
    double best_width = INFINITY;
    std::size_t j = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const point a = hull[i];
        const point b = hull[(i + 1) % n];
        const double len = std::abs(b - a);
        auto height = [&](std::size_t k) { return detail::cross(a, b, hull[k]) / len; };
        while (height((j + 1) % n) > height(j)) {
            j = (j + 1) % n;
        }
        const double w = height(j);
        if (w < best_width) {
            best_width = w;
            const point d = (b - a) / len;
            best.normal = point{-d.imag(), d.real()};
            const double base = a.real() * best.normal.real() + a.imag() * best.normal.imag();
            best.offset = base + 0.5 * w;
            best.half_width = 0.5 * w;
        }
    }
    return best;
}

}  // namespace cifs
