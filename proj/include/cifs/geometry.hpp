#pragma once

// Planar and linear geometry shared by every module. Points live in the
// complex plane; one-dimensional systems use the real axis (imag == 0).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

namespace cifs {

using point = std::complex<double>;

struct ball {
    point center{};
    double radius = 0.0;
    friend bool operator==(const ball&, const ball&) = default;
};

/// Axis-aligned box. In one dimension only the real parts are meaningful.
struct box {
    point lo{};
    point hi{};
    friend bool operator==(const box&, const box&) = default;
};

using region = std::variant<ball, box>;

struct interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

inline void check_dimension(int dim) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("only dimensions 1 and 2 are supported");
    }
}

inline interval as_interval(const region& r) {
    if (const auto* b = std::get_if<ball>(&r)) {
        return {b->center.real() - b->radius, b->center.real() + b->radius};
    }
    const auto& x = std::get<box>(r);
    return {std::min(x.lo.real(), x.hi.real()), std::max(x.lo.real(), x.hi.real())};
}

inline point center_of(const region& r) {
    if (const auto* b = std::get_if<ball>(&r)) {
        return b->center;
    }
    const auto& x = std::get<box>(r);
    return 0.5 * (x.lo + x.hi);
}

inline double diameter(const region& r, int dim) {
    if (dim == 1) {
        return as_interval(r).length();
    }
    if (const auto* b = std::get_if<ball>(&r)) {
        return 2.0 * b->radius;
    }
    const auto& x = std::get<box>(r);
    return std::abs(x.hi - x.lo);
}

/// Smallest ball (about the region's own center) that contains it.
inline ball bounding_ball(const region& r, int dim) {
    if (dim == 1) {
        const auto iv = as_interval(r);
        return {point{0.5 * (iv.lo + iv.hi), 0.0}, 0.5 * iv.length()};
    }
    if (const auto* b = std::get_if<ball>(&r)) {
        return *b;
    }
    const auto& x = std::get<box>(r);
    return {0.5 * (x.lo + x.hi), 0.5 * std::abs(x.hi - x.lo)};
}

inline bool contains_point(const region& r, point p, int dim, double tol = 0.0) {
    if (dim == 1) {
        const auto iv = as_interval(r);
        return p.real() >= iv.lo - tol && p.real() <= iv.hi + tol;
    }
    if (const auto* b = std::get_if<ball>(&r)) {
        return std::abs(p - b->center) <= b->radius + tol;
    }
    const auto& x = std::get<box>(r);
    return p.real() >= x.lo.real() - tol && p.real() <= x.hi.real() + tol &&
           p.imag() >= x.lo.imag() - tol && p.imag() <= x.hi.imag() + tol;
}

namespace detail {

inline double distance_to_box(point p, const box& x) {
    const double dx = std::max({x.lo.real() - p.real(), 0.0, p.real() - x.hi.real()});
    const double dy = std::max({x.lo.imag() - p.imag(), 0.0, p.imag() - x.hi.imag()});
    return std::hypot(dx, dy);
}

inline region shrink(const region& r, double by) {
    if (const auto* b = std::get_if<ball>(&r)) {
        return ball{b->center, b->radius - by};
    }
    const auto& x = std::get<box>(r);
    return box{x.lo + point{by, by}, x.hi - point{by, by}};
}

inline bool is_empty(const region& r, int dim) {
    if (dim == 1) {
        return as_interval(r).length() < 0.0;
    }
    if (const auto* b = std::get_if<ball>(&r)) {
        return b->radius < 0.0;
    }
    const auto& x = std::get<box>(r);
    return x.hi.real() < x.lo.real() || x.hi.imag() < x.lo.imag();
}

}  // namespace detail

/// inner is contained in outer inflated by tol.
inline bool contains(const region& outer, const region& inner, int dim, double tol = 0.0) {
    if (dim == 1) {
        const auto o = as_interval(outer);
        const auto i = as_interval(inner);
        return i.lo >= o.lo - tol && i.hi <= o.hi + tol;
    }
    if (const auto* ob = std::get_if<ball>(&outer)) {
        if (const auto* ib = std::get_if<ball>(&inner)) {
            return std::abs(ib->center - ob->center) + ib->radius <= ob->radius + tol;
        }
        const auto& x = std::get<box>(inner);
        for (point c : {x.lo, x.hi, point{x.lo.real(), x.hi.imag()}, point{x.hi.real(), x.lo.imag()}}) {
            if (std::abs(c - ob->center) > ob->radius + tol) {
                return false;
            }
        }
        return true;
    }
    const auto& ox = std::get<box>(outer);
    box ix{};
    if (const auto* ib = std::get_if<ball>(&inner)) {
        ix = box{ib->center - point{ib->radius, ib->radius}, ib->center + point{ib->radius, ib->radius}};
    } else {
        ix = std::get<box>(inner);
    }
    return ix.lo.real() >= ox.lo.real() - tol && ix.lo.imag() >= ox.lo.imag() - tol &&
           ix.hi.real() <= ox.hi.real() + tol && ix.hi.imag() <= ox.hi.imag() + tol;
}

/// True when the two regions, each shrunk by `shrink_by`, do not meet.
inline bool interiors_disjoint(const region& a, const region& b, int dim, double shrink_by) {
    const region sa = detail::shrink(a, shrink_by);
    const region sb = detail::shrink(b, shrink_by);
    if (detail::is_empty(sa, dim) || detail::is_empty(sb, dim)) {
        return true;
    }
    if (dim == 1) {
        const auto x = as_interval(sa);
        const auto y = as_interval(sb);
        return std::max(x.lo, y.lo) > std::min(x.hi, y.hi);
    }
    const auto* ba = std::get_if<ball>(&sa);
    const auto* bb = std::get_if<ball>(&sb);
    if (ba && bb) {
        return std::abs(ba->center - bb->center) > ba->radius + bb->radius;
    }
    if (ba) {
        return detail::distance_to_box(ba->center, std::get<box>(sb)) > ba->radius;
    }
    if (bb) {
        return detail::distance_to_box(bb->center, std::get<box>(sa)) > bb->radius;
    }
    const auto& x = std::get<box>(sa);
    const auto& y = std::get<box>(sb);
    return std::max(x.lo.real(), y.lo.real()) > std::min(x.hi.real(), y.hi.real()) ||
           std::max(x.lo.imag(), y.lo.imag()) > std::min(x.hi.imag(), y.hi.imag());
}

/// Closed boundary samples in cyclic order. One-dimensional regions yield
/// their two endpoints.
inline std::vector<point> boundary_samples(const region& r, int dim, std::size_t count = 64) {
    if (dim == 1) {
        const auto iv = as_interval(r);
        return {point{iv.lo, 0.0}, point{iv.hi, 0.0}};
    }
    std::vector<point> out;
    out.reserve(count);
    if (const auto* b = std::get_if<ball>(&r)) {
        for (std::size_t k = 0; k < count; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
            out.push_back(b->center + std::polar(b->radius, a));
        }
        return out;
    }
    const auto& x = std::get<box>(r);
    const point corners[4] = {x.lo, point{x.hi.real(), x.lo.imag()}, x.hi, point{x.lo.real(), x.hi.imag()}};
    const std::size_t per_side = std::max<std::size_t>(1, count / 4);
    for (int s = 0; s < 4; ++s) {
        const point a = corners[s];
        const point b = corners[(s + 1) % 4];
        for (std::size_t k = 0; k < per_side; ++k) {
            out.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(per_side)));
        }
    }
    return out;
}

/// Evaluation grid used when extremes of a smooth function over the region
/// are sampled (boundary plus interior).
inline std::vector<point> evaluation_grid(const region& r, int dim) {
    std::vector<point> out;
    if (dim == 1) {
        const auto iv = as_interval(r);
        constexpr int n = 9;
        for (int k = 0; k < n; ++k) {
            // Chebyshev-Lobatto nodes keep both endpoints.
            const double s = 0.5 * (1.0 - std::cos(std::numbers::pi * k / (n - 1)));
            out.emplace_back(iv.lo + s * iv.length(), 0.0);
        }
        return out;
    }
    const point c = center_of(r);
    out.push_back(c);
    if (const auto* b = std::get_if<ball>(&r)) {
        for (int k = 0; k < 6; ++k) {
            out.push_back(c + std::polar(0.5 * b->radius, 2.0 * std::numbers::pi * k / 6.0));
        }
        for (int k = 0; k < 12; ++k) {
            out.push_back(c + std::polar(b->radius, 2.0 * std::numbers::pi * (k + 0.5) / 12.0));
        }
        return out;
    }
    const auto& x = std::get<box>(r);
    for (int i = 0; i <= 4; ++i) {
        for (int j = 0; j <= 4; ++j) {
            if (i == 2 && j == 2) {
                continue;
            }
            out.emplace_back(x.lo.real() + (x.hi.real() - x.lo.real()) * i / 4.0,
                             x.lo.imag() + (x.hi.imag() - x.lo.imag()) * j / 4.0);
        }
    }
    return out;
}

/// Winding number of a closed polygon around p.
inline int winding_number(const std::vector<point>& polygon, point p) {
    double total = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t k = 0; k < n; ++k) {
        const point a = polygon[k] - p;
        const point b = polygon[(k + 1) % n] - p;
        total += std::arg(b / a);
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace cifs
