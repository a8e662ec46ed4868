#pragma once

// Quadratic polynomials z^2 + c: Julia samples, hyperbolicity evidence,
// inverse-branch systems, their dimension, and radial / semi-hyperbolic
// probes based on pulling back boundary curves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cifs/conformal_map.hpp"
#include "cifs/gdms.hpp"
#include "cifs/geometry.hpp"
#include "cifs/numeric.hpp"
#include "cifs/parallel.hpp"
#include "cifs/pressure.hpp"

namespace cifs {

struct quadratic_map {
    point c{};

    point operator()(point z) const { return z * z + c; }
    point derivative(point z) const { return 2.0 * z; }

    point iterate(point z, std::size_t n) const {
        for (std::size_t k = 0; k < n; ++k) {
            z = (*this)(z);
        }
        return z;
    }

    /// |(f^n)'(z)| by the chain rule.
    double iterate_derivative_abs(point z, std::size_t n) const {
        double d = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            d *= std::abs(derivative(z));
            z = (*this)(z);
        }
        return d;
    }

    double escape_radius() const { return std::max(2.0, std::abs(c)) + 1.0; }

    /// 0, c, c^2 + c, ... stopped early on escape.
    std::vector<point> critical_orbit(std::size_t n) const {
        std::vector<point> out{point{}};
        for (std::size_t k = 1; k < n; ++k) {
            out.push_back((*this)(out.back()));
            if (std::abs(out.back()) > escape_radius()) {
                break;
            }
        }
        return out;
    }

    /// The repelling fixed point (1 + sqrt(1 - 4c)) / 2, which lies on J.
    point beta() const { return 0.5 * (1.0 + std::sqrt(1.0 - 4.0 * c)); }
};

/// Backward-iteration sample of J: each point is an independent chain of
/// random preimages started at beta.
inline std::vector<point> julia_sample(const quadratic_map& f, std::size_t count, std::uint64_t seed,
                                       std::size_t steps = 48, unsigned threads = 1) {
    std::vector<point> out(count);
    parallel_for(count, threads, [&](std::size_t k) {
        auto rng = indexed_rng(seed, k);
        point z = f.beta();
        for (std::size_t s = 0; s < steps; ++s) {
            z = std::sqrt(z - f.c) * (uniform01(rng) < 0.5 ? 1.0 : -1.0);
        }
        out[k] = z;
    });
    return out;
}

struct hyperbolicity_evidence {
    bool hyperbolic = false;
    std::string kind;  // "attracting_cycle", "escape" or "none"
    std::size_t period = 0;
    double multiplier = 0.0;
    double margin = 0.0;  // distance from the critical orbit's limit to the J sample
    std::vector<point> cycle;
};

/// Critical orbit converging to an attracting cycle (10^4 iterations) or
/// escaping, with a 1e-3 margin between the cycle and the sample of J.
inline hyperbolicity_evidence hyperbolicity(const quadratic_map& f, const std::vector<point>& julia) {
    hyperbolicity_evidence out;
    point z{};
    for (int k = 0; k < 10000; ++k) {
        z = f(z);
        if (std::abs(z) > f.escape_radius()) {
            out.hyperbolic = true;
            out.kind = "escape";
            out.margin = INFINITY;
            return out;
        }
    }
    out.kind = "none";
    for (std::size_t p = 1; p <= 64; ++p) {
        point w = z;
        double mult = 1.0;
        std::vector<point> cyc;
        for (std::size_t k = 0; k < p; ++k) {
            cyc.push_back(w);
            mult *= std::abs(f.derivative(w));
            w = f(w);
        }
        if (std::abs(w - z) < 1e-9) {
            out.period = p;
            out.multiplier = mult;
            out.cycle = cyc;
            break;
        }
    }
    if (out.period == 0 || !(out.multiplier < 1.0)) {
        return out;
    }
    out.margin = INFINITY;
    for (point q : out.cycle) {
        for (point j : julia) {
            out.margin = std::min(out.margin, std::abs(q - j));
        }
    }
    if (out.margin >= 1e-3) {
        out.hyperbolic = true;
        out.kind = "attracting_cycle";
    }
    return out;
}

/// Refines the fixed point of a contracting branch g of f^-n: a few
/// iterations of g, then Newton on f^n(z) - z.
inline point branch_fixed_point(const quadratic_map& f, const analytic_branch& g) {
    point z = g.anchor;
    for (int k = 0; k < 200; ++k) {
        z = g(z);
    }
    const std::size_t n = g.depth();
    for (int k = 0; k < 4; ++k) {
        point w = z;
        point d{1.0, 0.0};
        for (std::size_t s = 0; s < n; ++s) {
            d *= f.derivative(w);
            w = f(w);
        }
        const point step = (w - z) / (d - 1.0);
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
            break;
        }
        z -= step;
    }
    return z;
}

struct branch_system {
    quadratic_map map;
    ball base;
    std::size_t depth = 0;
    std::vector<analytic_branch> branches;
    gdms system;
    bool empty() const { return branches.empty(); }
};

class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline double distance_to_critical_orbit(const quadratic_map& f, point z) {
    double d = INFINITY;
    for (point q : f.critical_orbit(200)) {
        d = std::min(d, std::abs(q - z));
    }
    return d;
}

/// Shrinks and refines the mapped enclosure check for a branch on B.
inline bool maps_strictly_inside(const analytic_branch& g, const ball& b) {
    const auto img = map_region(conformal_map{g}, region{b}, 2);
    return img.dmax < 1.0 && contains(region{b}, img.image, 2, -1e-9 * b.radius);
}

/// All 2^depth inverse branches of f^depth on B, keeping those that map B
/// strictly into itself (lexicographic in the sign sequence, + before -).
inline branch_system build_branch_system(const quadratic_map& f, point center, double radius, std::size_t depth,
                                         unsigned threads = 1) {
    if (!(radius > 0.0) || depth == 0 || depth > 20) {
        throw std::invalid_argument("branch system needs radius > 0 and 1 <= depth <= 20");
    }
    if (distance_to_critical_orbit(f, center) < 2.0 * radius) {
        throw precondition_error("base ball is within twice its radius of the critical orbit");
    }
    branch_system out;
    out.map = f;
    out.base = ball{center, radius};
    out.depth = depth;
    const std::size_t total = std::size_t{1} << depth;
    std::vector<std::optional<analytic_branch>> found(total);
    parallel_for(total, threads, [&](std::size_t code) {
        std::vector<int> signs(depth);
        for (std::size_t s = 0; s < depth; ++s) {
            signs[s] = ((code >> (depth - 1 - s)) & 1U) ? -1 : 1;
        }
        auto g = analytic_branch::make(f.c, signs, center);
        if (maps_strictly_inside(g, out.base)) {
            g.fixed_point = branch_fixed_point(f, g);
            found[code] = std::move(g);
        }
    });
    for (auto& g : found) {
        if (g) {
            out.branches.push_back(std::move(*g));
        }
    }
    if (!out.branches.empty()) {
        gdms& sys = out.system;
        sys.dim = 2;
        sys.vertices = {vertex{"B", out.base}};
        for (std::size_t k = 0; k < out.branches.size(); ++k) {
            std::string name;
            for (int s : out.branches[k].signs) {
                name += s > 0 ? '+' : '-';
            }
            sys.alph.edges.push_back(name);
            sys.alph.initial.push_back(0);
            sys.alph.terminal.push_back(0);
            sys.maps.emplace_back(out.branches[k]);
        }
        sys.alph.vertex_count = 1;
        sys.incidence = incidence_matrix::ones(out.branches.size());
        validate_or_throw(sys);
    }
    return out;
}

/// Graph directed system of depth-1 inverse branches on a cover of J by
/// balls of radius r centred on an r/3-net of the sample. Each branch on a
/// ball is kept when its image lies strictly inside some ball of the cover.
inline gdms build_branch_cover(const quadratic_map& f, const std::vector<point>& julia, double radius) {
    std::vector<point> net;
    for (point z : julia) {
        bool far = true;
        for (point q : net) {
            if (std::abs(q - z) <= radius / 3.0) {
                far = false;
                break;
            }
        }
        if (far) {
            net.push_back(z);
        }
    }
    gdms sys;
    sys.dim = 2;
    for (std::size_t v = 0; v < net.size(); ++v) {
        if (std::abs(net[v] - f.c) <= 2.0 * radius) {
            throw precondition_error("cover ball is too close to the critical value");
        }
        sys.vertices.push_back(vertex{"B" + std::to_string(v), ball{net[v], radius}});
    }
    sys.alph.vertex_count = net.size();
    for (std::size_t v = 0; v < net.size(); ++v) {
        for (int sign : {1, -1}) {
            auto g = analytic_branch::make(f.c, {sign}, net[v]);
            const auto img = map_region(conformal_map{g}, region{ball{net[v], radius}}, 2);
            const point target = center_of(img.image);
            std::size_t best = net.size();
            double best_d = INFINITY;
            for (std::size_t k = 0; k < net.size(); ++k) {
                const double d = std::abs(net[k] - target);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            if (best == net.size() || !(img.dmax < 1.0) ||
                !contains(region{ball{net[best], radius}}, img.image, 2, -1e-9 * radius)) {
                continue;
            }
            // phi_e : X_t(e) -> X_i(e), so the branch runs from ball v (terminal) into ball best (initial).
            sys.alph.edges.push_back("B" + std::to_string(v) + (sign > 0 ? "+" : "-"));
            sys.alph.initial.push_back(best);
            sys.alph.terminal.push_back(v);
            sys.maps.emplace_back(std::move(g));
        }
    }
    if (sys.maps.empty()) {
        throw precondition_error("no branch of the cover maps into the cover");
    }
    sys.incidence = incidence_matrix::maximal(sys.alph);
    validate_or_throw(sys);
    return sys;
}

struct ifs_candidate {
    std::string description;
    std::size_t edges = 0;
    std::optional<dimension_estimate> estimate;
    std::string note;
};

struct ifs_dimension_result {
    std::optional<dimension_estimate> estimate;  // lower bound: running max of certified lower endpoints
    std::vector<ifs_candidate> candidates;
};

struct ifs_search_options {
    std::size_t julia_points = 4000;
    double cover_fraction = 1.0 / 40.0;  // cover radius relative to the sample's extent
    bowen_options bowen{1e-4, 10, {}};
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Sup of Bowen roots over a budgeted family of inverse-branch systems:
/// first the cover of J, then single-ball systems of growing depth.
inline ifs_dimension_result ifs_dimension(const quadratic_map& f, std::size_t budget, ifs_search_options opt = {}) {
    ifs_dimension_result out;
    if (budget == 0) {
        return out;
    }
    const auto julia = julia_sample(f, opt.julia_points, opt.seed, 48, opt.threads);
    const auto evidence = hyperbolicity(f, julia);
    if (!evidence.hyperbolic || evidence.kind != "attracting_cycle") {
        throw precondition_error("no hyperbolicity evidence for c = (" + std::to_string(f.c.real()) + "," +
                                 std::to_string(f.c.imag()) + ")");
    }
    double extent = 0.0;
    for (point z : julia) {
        extent = std::max(extent, std::abs(z - julia.front()));
    }
    opt.bowen.pressure.threads = opt.threads;
    auto consider = [&](ifs_candidate cand, const gdms* sys) {
        if (sys) {
            try {
                cand.estimate = bowen_root(*sys, opt.bowen);
                const auto& d = *cand.estimate;
                if (!out.estimate || d.lo > out.estimate->lo) {
                    out.estimate = dimension_estimate{d.lo, d.lo, d.hi, "subsystem_sup", d.depth, d.iterations, d.resolved};
                }
            } catch (const std::exception& ex) {
                cand.note = ex.what();
            }
        }
        out.candidates.push_back(std::move(cand));
    };
    {
        ifs_candidate cand;
        const double r = opt.cover_fraction * extent;
        cand.description = "cover r=" + std::to_string(r);
        try {
            const gdms sys = build_branch_cover(f, julia, r);
            cand.edges = sys.edge_count();
            consider(std::move(cand), &sys);
        } catch (const std::exception& ex) {
            cand.note = ex.what();
            consider(std::move(cand), nullptr);
        }
    }
    for (std::size_t k = 1; out.candidates.size() < budget && k < 4 * budget + 8; ++k) {
        const point center = julia[(k * 7919) % julia.size()];
        const double radius = 0.15 * extent;
        const std::size_t depth = 3 + k % 6;
        ifs_candidate cand;
        cand.description = "ball (" + std::to_string(center.real()) + "," + std::to_string(center.imag()) +
                           ") r=" + std::to_string(radius) + " depth " + std::to_string(depth);
        try {
            const auto bs = build_branch_system(f, center, radius, depth, opt.threads);
            cand.edges = bs.branches.size();
            if (bs.empty()) {
                cand.note = "empty system";
                consider(std::move(cand), nullptr);
            } else {
                consider(std::move(cand), &bs.system);
            }
        } catch (const precondition_error& ex) {
            cand.note = ex.what();
            consider(std::move(cand), nullptr);
        }
    }
    return out;
}

namespace detail {

/// Pulls back a closed curve avoiding c under z -> z^2 + c, choosing the
/// square root continuously along the curve. When the curve winds around
/// c the lift closes only after two laps.
inline std::vector<point> lift_curve(const std::vector<point>& curve, point c, point seed_root, bool two_laps) {
    std::vector<point> out;
    const std::size_t laps = two_laps ? 2 : 1;
    out.reserve(curve.size() * laps);
    point prev = seed_root;
    for (std::size_t lap = 0; lap < laps; ++lap) {
        for (point w : curve) {
            const point s = std::sqrt(w - c);
            prev = std::norm(s - prev) <= std::norm(-s - prev) ? s : -s;
            out.push_back(prev);
        }
    }
    return out;
}

inline double distance_to_polygon(const std::vector<point>& poly, point p) {
    double d = INFINITY;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const point a = poly[k];
        const point b = poly[(k + 1) % poly.size()];
        const point ab = b - a;
        const double t = std::clamp(((p - a) * std::conj(ab)).real() / std::max(std::norm(ab), 1e-300), 0.0, 1.0);
        d = std::min(d, std::abs(a + t * ab - p));
    }
    return d;
}

inline double polygon_extent(const std::vector<point>& poly) {
    double d = 0.0;
    for (point p : poly) {
        d = std::max(d, std::abs(p - poly.front()));
    }
    return d;
}

}  // namespace detail

struct radial_evidence {
    bool radial = false;
    bool escaped = false;
    std::size_t good_times = 0;  // n <= horizon with a univalent pullback
    std::size_t horizon = 0;
};

/// Counts the times n <= horizon at which B(f^n(z0), delta) pulls back
/// univalently along the orbit to z0 (no critical value inside any
/// intermediate component).
inline radial_evidence radial_probe(const quadratic_map& f, point z0, std::size_t horizon, double delta,
                                    std::size_t curve_points = 128) {
    radial_evidence out;
    out.horizon = horizon;
    std::vector<point> orbit{z0};
    for (std::size_t n = 0; n < horizon; ++n) {
        if (std::abs(orbit.back()) > f.escape_radius()) {
            out.escaped = true;
            return out;
        }
        orbit.push_back(f(orbit.back()));
    }
    if (std::abs(orbit.back()) > f.escape_radius()) {
        out.escaped = true;
        return out;
    }
    for (std::size_t n = 1; n <= horizon; ++n) {
        auto curve = boundary_samples(region{ball{orbit[n], delta}}, 2, curve_points);
        bool univalent = true;
        for (std::size_t k = n; k-- > 0;) {
            if (winding_number(curve, f.c) != 0 || detail::distance_to_polygon(curve, f.c) == 0.0) {
                univalent = false;
                break;
            }
            curve = detail::lift_curve(curve, f.c, orbit[k], false);
        }
        if (univalent) {
            ++out.good_times;
        }
    }
    out.radial = 2 * out.good_times >= horizon && horizon > 0;
    return out;
}

struct semihyperbolic_report {
    std::size_t max_degree = 1;
    std::size_t centers_used = 0;
    std::size_t skipped = 0;
    point worst_center{};
    std::size_t worst_depth = 0;
};

/// Largest degree of f^n on a component of f^-n(B(x, eps)), n <= depth_cap,
/// over the given centres. Components are tracked as closed curves; a lap
/// around the critical value doubles the degree.
inline semihyperbolic_report semihyperbolic_probe(const quadratic_map& f, double eps, std::size_t depth_cap,
                                                  const std::vector<point>& centers, std::size_t curve_points = 96,
                                                  std::size_t max_components = 4096) {
    semihyperbolic_report out;
    for (point x : centers) {
        struct component {
            std::vector<point> curve;
            std::size_t degree;
        };
        std::vector<component> level{{boundary_samples(region{ball{x, eps}}, 2, curve_points), 1}};
        bool failed = false;
        std::size_t local_max = 1;
        std::size_t local_depth = 0;
        for (std::size_t n = 1; n <= depth_cap && !failed; ++n) {
            std::vector<component> next;
            for (const auto& comp : level) {
                const double ext = detail::polygon_extent(comp.curve);
                if (detail::distance_to_polygon(comp.curve, f.c) < 1e-6 * std::max(ext, 1e-300)) {
                    failed = true;
                    break;
                }
                const point root = std::sqrt(comp.curve.front() - f.c);
                if (winding_number(comp.curve, f.c) != 0) {
                    next.push_back({detail::lift_curve(comp.curve, f.c, root, true), 2 * comp.degree});
                } else {
                    next.push_back({detail::lift_curve(comp.curve, f.c, root, false), comp.degree});
                    next.push_back({detail::lift_curve(comp.curve, f.c, -root, false), comp.degree});
                }
            }
            if (failed) {
                break;
            }
            for (const auto& comp : next) {
                if (comp.degree > local_max) {
                    local_max = comp.degree;
                    local_depth = n;
                }
            }
            if (next.size() > max_components) {
                next.resize(max_components);
            }
            level = std::move(next);
        }
        if (failed) {
            ++out.skipped;
            continue;
        }
        ++out.centers_used;
        if (local_max > out.max_degree) {
            out.max_degree = local_max;
            out.worst_center = x;
            out.worst_depth = local_depth;
        }
    }
    return out;
}

}  // namespace cifs
