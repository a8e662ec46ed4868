#pragma once

// Sufficient tests for geometric irreducibility of planar limit-set samples.
// Neither test ever certifies reducibility.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cifs/gdms.hpp"
#include "cifs/geometry.hpp"
#include "cifs/strip.hpp"

namespace cifs {

enum class irreducibility_verdict { irreducible, inconclusive };

inline const char* to_string(irreducibility_verdict v) {
    return v == irreducibility_verdict::irreducible ? "irreducible" : "inconclusive";
}

/// Koebe distortion of side ratios for a triangle inside B(0, r), r <= 1/20,
/// under a univalent map of the unit disk.
inline double koebe_ratio_distortion(double r) {
    const double q = (19.0 + 20.0 * r) / (19.0 - 20.0 * r);
    return q * q;
}

/// Longest over shortest side; degenerate triangles always have ratio >= 2.
inline double side_ratio(point a, point b, point c) {
    const double s[3] = {std::abs(a - b), std::abs(b - c), std::abs(c - a)};
    const double lo = std::min({s[0], s[1], s[2]});
    const double hi = std::max({s[0], s[1], s[2]});
    return lo > 0.0 ? hi / lo : INFINITY;
}

struct koebe_result {
    irreducibility_verdict verdict = irreducibility_verdict::inconclusive;
    std::array<std::size_t, 3> triangle{};
    double ratio = INFINITY;       // best side ratio found, in rescaled coordinates
    double distortion = INFINITY;  // Koebe factor for the triangle's radius
};

/// Looks for three sample points in B(0, 1/20) (after rescaling the domain
/// ball to the unit disk) whose side ratio stays below 2 even after the
/// worst-case Koebe distortion.
inline koebe_result koebe_triangle_irreducibility(const point_sample& sample, const ball& domain) {
    if (sample.dim != 2) {
        throw std::invalid_argument("the Koebe triangle test is planar");
    }
    constexpr double inner = 1.0 / 20.0;
    constexpr std::size_t max_candidates = 80;
    std::vector<std::pair<double, std::size_t>> inside;
    for (std::size_t k = 0; k < sample.size(); ++k) {
        const double r = std::abs((sample.points[k] - domain.center) / domain.radius);
        if (r < inner) {
            inside.emplace_back(r, k);
        }
    }
    std::sort(inside.begin(), inside.end());
    if (inside.size() > max_candidates) {
        inside.resize(max_candidates);
    }
    koebe_result out;
    for (std::size_t i = 0; i < inside.size(); ++i) {
        for (std::size_t j = i + 1; j < inside.size(); ++j) {
            for (std::size_t k = j + 1; k < inside.size(); ++k) {
                const point a = (sample.points[inside[i].second] - domain.center) / domain.radius;
                const point b = (sample.points[inside[j].second] - domain.center) / domain.radius;
                const point c = (sample.points[inside[k].second] - domain.center) / domain.radius;
                const double ratio = side_ratio(a, b, c);
                if (ratio < out.ratio) {
                    out.ratio = ratio;
                    out.triangle = {inside[i].second, inside[j].second, inside[k].second};
                    out.distortion = koebe_ratio_distortion(std::max({inside[i].first, inside[j].first, inside[k].first}));
                }
            }
        }
    }
    if (out.ratio * out.distortion < 2.0) {
        out.verdict = irreducibility_verdict::irreducible;
    }
    return out;
}

struct sphere_fit {
    double residual = 0.0;  // max distance from a sample point to the fitted circle or line
    bool is_line = false;
    point center{};
    double radius = 0.0;
    strip line;
};

namespace detail {

inline double circle_residual(const std::vector<point>& pts, point c, double r) {
    double worst = 0.0;
    for (point p : pts) {
        worst = std::max(worst, std::abs(std::abs(p - c) - r));
    }
    return worst;
}

/// Algebraic (Kasa) circle: least squares in x^2 + y^2 + D x + E y + F = 0.
inline std::optional<std::pair<point, double>> kasa_circle(const std::vector<point>& pts) {
    double m[3][4] = {};
    for (point p : pts) {
        const double x = p.real();
        const double y = p.imag();
        const double row[3] = {x, y, 1.0};
        const double rhs = -(x * x + y * y);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                m[i][j] += row[i] * row[j];
            }
            m[i][3] += row[i] * rhs;
        }
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r) {
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) {
                piv = r;
            }
        }
        if (std::abs(m[piv][c]) < 1e-300) {
            return std::nullopt;
        }
        std::swap(m[c], m[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r != c) {
                const double f = m[r][c] / m[c][c];
                for (int k = c; k < 4; ++k) {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    const double d = m[0][3] / m[0][0];
    const double e = m[1][3] / m[1][1];
    const double f = m[2][3] / m[2][2];
    const point c{-d / 2.0, -e / 2.0};
    const double r2 = std::norm(c) - f;
    if (!(r2 > 0.0) || !std::isfinite(r2)) {
        return std::nullopt;
    }
    return std::make_pair(c, std::sqrt(r2));
}

/// Nelder-Mead on (cx, cy, r) for the max-residual objective.
inline std::pair<point, double> refine_circle(const std::vector<point>& pts, point c, double r, double scale) {
    using vec = std::array<double, 3>;
    auto f = [&](const vec& v) { return circle_residual(pts, point{v[0], v[1]}, std::abs(v[2])); };
    std::array<vec, 4> s{vec{c.real(), c.imag(), r}, vec{c.real() + scale, c.imag(), r},
                         vec{c.real(), c.imag() + scale, r}, vec{c.real(), c.imag(), r + scale}};
    std::array<double, 4> fs{};
    for (int i = 0; i < 4; ++i) {
        fs[i] = f(s[i]);
    }
    for (int it = 0; it < 600; ++it) {
        std::array<int, 4> idx{0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        const int best = idx[0];
        const int worst = idx[3];
        const int second = idx[2];
        if (fs[worst] - fs[best] < 1e-15 * (1.0 + fs[best])) {
            break;
        }
        vec cen{};
        for (int i = 0; i < 4; ++i) {
            if (i != worst) {
                for (int k = 0; k < 3; ++k) {
                    cen[k] += s[i][k] / 3.0;
                }
            }
        }
        auto along = [&](double t) {
            vec v{};
            for (int k = 0; k < 3; ++k) {
                v[k] = cen[k] + t * (s[worst][k] - cen[k]);
            }
            return v;
        };
        const vec xr = along(-1.0);
        const double fr = f(xr);
        if (fr < fs[best]) {
            const vec xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s[worst] = xe;
                fs[worst] = fe;
            } else {
                s[worst] = xr;
                fs[worst] = fr;
            }
        } else if (fr < fs[second]) {
            s[worst] = xr;
            fs[worst] = fr;
        } else {
            const vec xc = along(fr < fs[worst] ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fs[worst])) {
                s[worst] = xc;
                fs[worst] = fc;
            } else {
                for (int i = 0; i < 4; ++i) {
                    if (i != best) {
                        for (int k = 0; k < 3; ++k) {
                            s[i][k] = s[best][k] + 0.5 * (s[i][k] - s[best][k]);
                        }
                        fs[i] = f(s[i]);
                    }
                }
            }
        }
    }
    const int best = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
    return {point{s[best][0], s[best][1]}, std::abs(s[best][2])};
}

}  // namespace detail

/// Best generalized circle (circle or line) in the max-residual sense.
inline sphere_fit generalized_sphere_fit(const point_sample& sample) {
    const auto& pts = sample.points;
    if (pts.size() < 4) {
        throw std::invalid_argument("sphere fit needs at least 4 points");
    }
    if (std::all_of(pts.begin(), pts.end(), [&](point p) { return p == pts.front(); })) {
        throw std::invalid_argument("degenerate sample: all points identical");
    }
    sphere_fit out;
    out.line = min_width_strip(pts);
    out.is_line = true;
    out.residual = out.line.half_width;
    if (sample.dim == 1) {
        return out;
    }
    if (auto circle = detail::kasa_circle(pts)) {
        double extent = 0.0;
        for (point p : pts) {
            extent = std::max(extent, std::abs(p - pts.front()));
        }
        auto [c, r] = detail::refine_circle(pts, circle->first, circle->second, 0.05 * extent);
        const double res = detail::circle_residual(pts, c, r);
        if (res < out.residual) {
            out.is_line = false;
            out.center = c;
            out.radius = r;
            out.residual = res;
        }
    }
    return out;
}

}  // namespace cifs
