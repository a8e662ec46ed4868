#pragma once

// Conformal contractions used as edge maps: similarities, Moebius maps and
// numerically continued inverse branches of z^2 + c.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

#include "cifs/geometry.hpp"

namespace cifs {

/// z -> ratio * e^{i rotation} * (reflect ? conj(z) : z) + translation.
struct similarity {
    double ratio = 1.0;
    double rotation = 0.0;  // radians
    bool reflect = false;
    point translation{};

    point operator()(point z) const {
        const point w = reflect ? std::conj(z) : z;
        return ratio * std::polar(1.0, rotation) * w + translation;
    }
    friend bool operator==(const similarity&, const similarity&) = default;
};

/// z -> (a z + b) / (c z + d); real coefficients act on the line.
struct moebius {
    point a{1.0, 0.0};
    point b{};
    point c{};
    point d{1.0, 0.0};

    point operator()(point z) const { return (a * z + b) / (c * z + d); }
    point determinant() const { return a * d - b * c; }
    double derivative_abs(point z) const { return std::abs(determinant()) / std::norm(c * z + d); }
    friend bool operator==(const moebius&, const moebius&) = default;
};

/// An inverse branch of f^depth for f(z) = z^2 + c, defined near `anchor`
/// by analytic continuation of the root choices `signs` (one per backward
/// step, relative to the principal square root along the anchor's chain).
struct analytic_branch {
    point c{};
    std::vector<int> signs;
    point anchor{};
    point fixed_point{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    std::vector<point> reference;  // backward chain of the anchor, one entry per step

    static analytic_branch make(point c, std::vector<int> signs, point anchor) {
        analytic_branch br;
        br.c = c;
        br.signs = std::move(signs);
        br.anchor = anchor;
        point z = anchor;
        for (int s : br.signs) {
            z = (s >= 0 ? 1.0 : -1.0) * std::sqrt(z - c);
            br.reference.push_back(z);
        }
        return br;
    }

    std::size_t depth() const { return signs.size(); }

    /// Backward chain of w: chain[k] is the image after k + 1 steps.
    std::vector<point> chain(point w) const {
        std::vector<point> out;
        out.reserve(reference.size());
        point z = w;
        for (const point& ref : reference) {
            const point s = std::sqrt(z - c);
            z = std::norm(s - ref) <= std::norm(-s - ref) ? s : -s;
            out.push_back(z);
        }
        return out;
    }

    point operator()(point w) const {
        point z = w;
        for (const point& ref : reference) {
            const point s = std::sqrt(z - c);
            z = std::norm(s - ref) <= std::norm(-s - ref) ? s : -s;
        }
        return z;
    }

    /// |g'(w)| = prod 1 / |2 z_k| along the backward chain.
    double derivative_abs(point w) const {
        point z = w;
        double prod = 1.0;
        for (const point& ref : reference) {
            const point s = std::sqrt(z - c);
            z = std::norm(s - ref) <= std::norm(-s - ref) ? s : -s;
            prod /= 2.0 * std::abs(z);
        }
        return prod;
    }

    friend bool operator==(const analytic_branch& x, const analytic_branch& y) {
        auto same = [](point p, point q) {
            return (p == q) || (std::isnan(p.real()) && std::isnan(q.real()) && std::isnan(p.imag()) == std::isnan(q.imag()));
        };
        return x.c == y.c && x.signs == y.signs && x.anchor == y.anchor && same(x.fixed_point, y.fixed_point);
    }
};

using conformal_map = std::variant<similarity, moebius, analytic_branch>;

inline point apply(const conformal_map& m, point z) {
    return std::visit([z](const auto& f) { return f(z); }, m);
}

inline double derivative_abs(const conformal_map& m, point z) {
    return std::visit(
        [z](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, similarity>) {
                return f.ratio;
            } else {
                return f.derivative_abs(z);
            }
        },
        m);
}

/// Outer enclosure of phi(R) together with bounds on |phi'| over R.
struct mapped_region {
    region image;
    double dmin = 0.0;
    double dmax = 0.0;
};

class map_domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace detail {

inline ball circumcircle(point p, point q, point r) {
    const point b = q - p;
    const point c = r - p;
    const double d = 2.0 * (b.real() * c.imag() - b.imag() * c.real());
    if (d == 0.0) {
        throw map_domain_error("degenerate circle image");
    }
    const double bb = std::norm(b);
    const double cc = std::norm(c);
    const point u{(c.imag() * bb - b.imag() * cc) / d, (b.real() * cc - c.real() * bb) / d};
    return {p + u, std::abs(u)};
}

/// Sampled enclosure for any conformal map: images of boundary samples plus
/// half the largest gap between consecutive samples as a margin. log|phi'|
/// is harmonic, so its extremes sit on the boundary.
template <class Map>
mapped_region sampled_image(const Map& f, const region& r, std::size_t samples) {
    const auto bd = boundary_samples(r, 2, samples);
    const point c0 = center_of(r);
    const point fc = f(c0);
    double radius = 0.0;
    double gap = 0.0;
    double lmin = INFINITY;
    double lmax = -INFINITY;
    double lgap = 0.0;
    std::vector<point> img(bd.size());
    std::vector<double> logs(bd.size());
    for (std::size_t k = 0; k < bd.size(); ++k) {
        img[k] = f(bd[k]);
        logs[k] = std::log(f.derivative_abs(bd[k]));
    }
    for (std::size_t k = 0; k < bd.size(); ++k) {
        const std::size_t n = (k + 1) % bd.size();
        radius = std::max(radius, std::abs(img[k] - fc));
        gap = std::max(gap, std::abs(img[n] - img[k]));
        lmin = std::min(lmin, logs[k]);
        lmax = std::max(lmax, logs[k]);
        lgap = std::max(lgap, std::abs(logs[n] - logs[k]));
    }
    return {ball{fc, radius + 0.5 * gap}, std::exp(lmin - 0.5 * lgap), std::exp(lmax + 0.5 * lgap)};
}

inline mapped_region similarity_image(const similarity& f, const region& r, int dim) {
    if (dim == 1) {
        const auto iv = as_interval(r);
        const double x = f(point{iv.lo, 0.0}).real();
        const double y = f(point{iv.hi, 0.0}).real();
        return {box{point{std::min(x, y), 0.0}, point{std::max(x, y), 0.0}}, f.ratio, f.ratio};
    }
    if (const auto* b = std::get_if<ball>(&r)) {
        return {ball{f(b->center), f.ratio * b->radius}, f.ratio, f.ratio};
    }
    // Image of a box: bounding box of the transformed corners (exact for
    // quarter-turn rotations).
    const auto& x = std::get<box>(r);
    const point corners[4] = {x.lo, x.hi, point{x.lo.real(), x.hi.imag()}, point{x.hi.real(), x.lo.imag()}};
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (point p : corners) {
        const point q = f(p);
        xmin = std::min(xmin, q.real());
        xmax = std::max(xmax, q.real());
        ymin = std::min(ymin, q.imag());
        ymax = std::max(ymax, q.imag());
    }
    return {box{point{xmin, ymin}, point{xmax, ymax}}, f.ratio, f.ratio};
}

inline mapped_region moebius_image(const moebius& f, const region& r, int dim) {
    if (dim == 1) {
        const auto iv = as_interval(r);
        const point lo{iv.lo, 0.0};
        const point hi{iv.hi, 0.0};
        const double slo = (f.c * lo + f.d).real();
        const double shi = (f.c * hi + f.d).real();
        if (slo == 0.0 || shi == 0.0 || (slo < 0.0) != (shi < 0.0)) {
            throw map_domain_error("Moebius pole inside the interval");
        }
        const double x = f(lo).real();
        const double y = f(hi).real();
        const double da = f.derivative_abs(lo);
        const double db = f.derivative_abs(hi);
        return {box{point{std::min(x, y), 0.0}, point{std::max(x, y), 0.0}}, std::min(da, db), std::max(da, db)};
    }
    if (const auto* b = std::get_if<ball>(&r)) {
        if (f.c == point{}) {
            const point s = f.a / f.d;
            return {ball{f(b->center), std::abs(s) * b->radius}, std::abs(s), std::abs(s)};
        }
        const point pole = -f.d / f.c;
        const double dist = std::abs(b->center - pole);
        if (dist <= b->radius) {
            throw map_domain_error("Moebius pole inside the ball");
        }
        const double k = std::abs(f.determinant()) / std::norm(f.c);
        const double near = dist - b->radius;
        const double far = dist + b->radius;
        const auto circle = circumcircle(f(b->center + b->radius), f(b->center + point{0.0, b->radius}),
                                         f(b->center - b->radius));
        return {circle, k / (far * far), k / (near * near)};
    }
    return sampled_image(f, r, 128);
}

}  // namespace detail

/// Image enclosure of R under the map and the extremes of |phi'| on R.
inline mapped_region map_region(const conformal_map& m, const region& r, int dim) {
    if (const auto* s = std::get_if<similarity>(&m)) {
        return detail::similarity_image(*s, r, dim);
    }
    if (const auto* mb = std::get_if<moebius>(&m)) {
        return detail::moebius_image(*mb, r, dim);
    }
    if (dim != 2) {
        throw map_domain_error("analytic branches act on planar regions only");
    }
    return detail::sampled_image(std::get<analytic_branch>(m), r, 96);
}

}  // namespace cifs
