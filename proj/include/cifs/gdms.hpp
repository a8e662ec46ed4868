#pragma once

// Graph directed Markov systems: vertices with seed regions, edges carrying
// conformal maps, coding map, cylinders, OSC evidence and limit-set samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cifs/conformal_map.hpp"
#include "cifs/geometry.hpp"
#include "cifs/numeric.hpp"
#include "cifs/parallel.hpp"
#include "cifs/symbolic.hpp"

namespace cifs {

struct vertex {
    std::string name;
    region seed;
};

/// Contraction data derived on validation. Single letters may fail to
/// contract (the Gauss map phi_1 has |phi_1'(0)| = 1); blocks of `step`
/// letters always do.
struct contraction_data {
    double lambda = 0.0;        // max per-letter |phi_e'| over X_t(e)
    std::size_t step = 1;       // block length k with lambda_k < 1
    double lambda_step = 0.0;   // max |phi_w'| over words of length k
    double max_diameter = 0.0;  // max_v diam(X_v)

    /// Upper bound for sup |phi_w'| over words of length n.
    double derivative_bound(std::size_t n) const {
        const double blocks = static_cast<double>(n / step);
        const double rest = static_cast<double>(n % step);
        return std::pow(lambda_step, blocks) * std::pow(std::max(1.0, lambda), rest);
    }
    double diameter_bound(std::size_t n) const { return derivative_bound(n) * max_diameter; }
};

class validation_error : public std::invalid_argument {
public:
    explicit validation_error(std::vector<std::string> problems)
        : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string out;
        for (const auto& s : p) {
            out += (out.empty() ? "" : "; ") + s;
        }
        return out;
    }
    std::vector<std::string> problems_;
};

struct gdms {
    int dim = 1;
    std::vector<vertex> vertices;
    alphabet alph;
    incidence_matrix incidence;
    std::vector<conformal_map> maps;
    // Nested finite edge sets standing in for an infinite alphabet.
    std::vector<std::vector<std::size_t>> filtration;
    std::string alphabet_rule;
    contraction_data contraction;

    std::size_t edge_count() const { return maps.size(); }
    const region& domain_of(std::size_t e) const { return vertices[alph.terminal[e]].seed; }
    const region& codomain_of(std::size_t e) const { return vertices[alph.initial[e]].seed; }
};

struct cylinder_data {
    word letters;
    region image;
    double dmin = 1.0;
    double dmax = 1.0;
};

inline constexpr double containment_tolerance = 1e-9;

/// Image enclosure and derivative bounds of phi_w over X_t(w), built from
/// the innermost letter outward so each factor is bounded on the region it
/// actually acts on.
inline cylinder_data cylinder_unchecked(const gdms& sys, const word& w) {
    cylinder_data out;
    out.letters = w;
    if (w.empty()) {
        throw std::invalid_argument("cylinder of the empty word is undefined");
    }
    region r = sys.domain_of(w.back());
    for (std::size_t k = w.size(); k-- > 0;) {
        const auto m = map_region(sys.maps[w[k]], r, sys.dim);
        out.dmin *= m.dmin;
        out.dmax *= m.dmax;
        r = m.image;
    }
    out.image = r;
    return out;
}

namespace detail {

inline std::string edge_label(const gdms& sys, std::size_t e) {
    return e < sys.alph.edges.size() ? sys.alph.edges[e] : std::to_string(e);
}

inline void collect_structure_problems(const gdms& sys, std::vector<std::string>& problems) {
    if (sys.dim != 1 && sys.dim != 2) {
        problems.push_back("dimension must be 1 or 2");
    }
    if (sys.vertices.empty()) {
        problems.push_back("no vertices");
    }
    const std::size_t n = sys.maps.size();
    if (n == 0) {
        problems.push_back("no edges");
    }
    if (sys.alph.size() != n || sys.alph.initial.size() != n || sys.alph.terminal.size() != n) {
        problems.push_back("alphabet and map list sizes differ");
        return;
    }
    if (sys.alph.vertex_count != sys.vertices.size()) {
        problems.push_back("alphabet vertex count differs from the vertex list");
    }
    for (std::size_t e = 0; e < n; ++e) {
        for (std::size_t f = e + 1; f < n; ++f) {
            if (sys.alph.edges[e] == sys.alph.edges[f]) {
                problems.push_back("duplicate edge identifier '" + sys.alph.edges[e] + "'");
            }
        }
        if (sys.alph.initial[e] >= sys.vertices.size() || sys.alph.terminal[e] >= sys.vertices.size()) {
            problems.push_back("edge '" + edge_label(sys, e) + "' refers to a missing vertex");
        }
    }
    if (sys.incidence.size() != n) {
        problems.push_back("incidence matrix size differs from the edge count");
        return;
    }
    for (std::size_t e = 0; e < n; ++e) {
        for (std::size_t f = 0; f < n; ++f) {
            if (sys.incidence(e, f) && sys.alph.terminal[e] != sys.alph.initial[f]) {
                problems.push_back("incidence pair (" + edge_label(sys, e) + "," + edge_label(sys, f) +
                                   ") violates the matrix constraint t(e) = i(f)");
            }
        }
    }
    for (const auto& level : sys.filtration) {
        for (auto e : level) {
            if (e >= n) {
                problems.push_back("filtration refers to a missing edge");
            }
        }
    }
    for (std::size_t k = 1; k < sys.filtration.size(); ++k) {
        for (auto e : sys.filtration[k - 1]) {
            if (std::find(sys.filtration[k].begin(), sys.filtration[k].end(), e) == sys.filtration[k].end()) {
                problems.push_back("filtration sets are not nested");
                break;
            }
        }
    }
}

inline std::size_t word_power(std::size_t base, std::size_t k) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < k; ++i) {
        out *= base;
    }
    return out;
}

}  // namespace detail

/// Checks every invariant and fills in the contraction data. Returns the
/// list of violated invariants (empty when the system is valid).
inline std::vector<std::string> validate(gdms& sys) {
    std::vector<std::string> problems;
    detail::collect_structure_problems(sys, problems);
    if (!problems.empty()) {
        return problems;
    }
    auto& cd = sys.contraction;
    cd = {};
    for (const auto& v : sys.vertices) {
        cd.max_diameter = std::max(cd.max_diameter, diameter(v.seed, sys.dim));
        if (diameter(v.seed, sys.dim) <= 0.0) {
            problems.push_back("vertex '" + v.name + "' has an empty seed region");
        }
    }
    for (std::size_t e = 0; e < sys.edge_count(); ++e) {
        const auto& m = sys.maps[e];
        const std::string label = detail::edge_label(sys, e);
        if (const auto* s = std::get_if<similarity>(&m)) {
            if (!(s->ratio > 0.0 && s->ratio < 1.0)) {
                problems.push_back("edge '" + label + "' is not a contraction (ratio " + std::to_string(s->ratio) + ")");
                continue;
            }
            if (sys.dim == 1 && std::abs(std::sin(s->rotation)) > 1e-12) {
                problems.push_back("edge '" + label + "' rotates off the real line");
                continue;
            }
        }
        if (const auto* mb = std::get_if<moebius>(&m)) {
            if (std::abs(mb->determinant()) == 0.0) {
                problems.push_back("edge '" + label + "' has a singular Moebius matrix");
                continue;
            }
        }
        try {
            const auto img = map_region(m, sys.domain_of(e), sys.dim);
            if (!contains(sys.codomain_of(e), img.image, sys.dim, containment_tolerance)) {
                problems.push_back("edge '" + label + "' does not map X_t(e) into X_i(e)");
            }
            cd.lambda = std::max(cd.lambda, img.dmax);
        } catch (const std::exception& ex) {
            problems.push_back("edge '" + label + "': " + ex.what());
        }
    }
    if (!problems.empty()) {
        return problems;
    }
    cd.step = 1;
    cd.lambda_step = cd.lambda;
    // Eventual contraction: look for a block length k <= 4 with lambda_k < 1.
    for (std::size_t k = 2; cd.lambda_step >= 1.0 && k <= 4; ++k) {
        if (detail::word_power(sys.edge_count(), k) > 200000) {
            break;
        }
        double worst = 0.0;
        for (const auto& w : admissible_words(sys.incidence, sys.alph, k)) {
            worst = std::max(worst, cylinder_unchecked(sys, w).dmax);
        }
        cd.step = k;
        cd.lambda_step = worst;
    }
    if (!(cd.lambda_step < 1.0)) {
        problems.push_back("system is not a contraction (lambda = " + std::to_string(cd.lambda) + ")");
    }
    return problems;
}

inline void validate_or_throw(gdms& sys) {
    auto problems = validate(sys);
    if (!problems.empty()) {
        throw validation_error(std::move(problems));
    }
}

/// Restriction to a subset of edges, keeping their relative order.
inline gdms subsystem(const gdms& sys, std::vector<std::size_t> keep) {
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    gdms out;
    out.dim = sys.dim;
    out.vertices = sys.vertices;
    out.alph.vertex_count = sys.alph.vertex_count;
    for (auto e : keep) {
        if (e >= sys.edge_count()) {
            throw std::out_of_range("subsystem edge index out of range");
        }
        out.alph.edges.push_back(sys.alph.edges[e]);
        out.alph.initial.push_back(sys.alph.initial[e]);
        out.alph.terminal.push_back(sys.alph.terminal[e]);
        out.maps.push_back(sys.maps[e]);
    }
    out.incidence = sys.incidence.restricted(keep);
    validate_or_throw(out);
    return out;
}

/// phi_w = phi_w1 o ... o phi_wn with a chain-rule derivative.
class composed_map {
public:
    composed_map(std::vector<conformal_map> parts) : parts_(std::move(parts)) {}

    point operator()(point z) const {
        for (std::size_t k = parts_.size(); k-- > 0;) {
            z = cifs::apply(parts_[k], z);
        }
        return z;
    }

    double derivative_abs(point z) const {
        double d = 1.0;
        for (std::size_t k = parts_.size(); k-- > 0;) {
            d *= cifs::derivative_abs(parts_[k], z);
            z = cifs::apply(parts_[k], z);
        }
        return d;
    }

    std::size_t length() const { return parts_.size(); }

    /// Closed form when every factor is a similarity.
    std::optional<similarity> as_similarity() const {
        point a{1.0, 0.0};
        point b{};
        bool flip = false;
        // Accumulate outer o inner, left to right: z -> a * s(z) + b.
        for (const auto& m : parts_) {
            const auto* s = std::get_if<similarity>(&m);
            if (!s) {
                return std::nullopt;
            }
            const point as = s->ratio * std::polar(1.0, s->rotation);
            const point t = s->translation;
            // (a s_flip(.) + b) o (as r(.) + t)
            const point as_f = flip ? std::conj(as) : as;
            const point t_f = flip ? std::conj(t) : t;
            b = a * t_f + b;
            a = a * as_f;
            flip = flip != s->reflect;
        }
        return similarity{std::abs(a), std::arg(a), flip, b};
    }

    /// Closed form when every factor is a Moebius map or an unreflected similarity.
    std::optional<moebius> as_moebius() const {
        moebius acc;
        for (const auto& m : parts_) {
            moebius f;
            if (const auto* s = std::get_if<similarity>(&m)) {
                if (s->reflect) {
                    return std::nullopt;
                }
                f = moebius{s->ratio * std::polar(1.0, s->rotation), s->translation, {}, {1.0, 0.0}};
            } else if (const auto* mb = std::get_if<moebius>(&m)) {
                f = *mb;
            } else {
                return std::nullopt;
            }
            acc = moebius{acc.a * f.a + acc.b * f.c, acc.a * f.b + acc.b * f.d, acc.c * f.a + acc.d * f.c,
                          acc.c * f.b + acc.d * f.d};
        }
        return acc;
    }

private:
    std::vector<conformal_map> parts_;
};

inline composed_map compose(const gdms& sys, const word& w) {
    if (w.empty()) {
        throw std::invalid_argument("compose needs a nonempty word");
    }
    require_admissible(sys.incidence, w);
    std::vector<conformal_map> parts;
    parts.reserve(w.size());
    for (auto e : w) {
        parts.push_back(sys.maps[e]);
    }
    return composed_map(std::move(parts));
}

inline cylinder_data cylinder(const gdms& sys, const word& w) {
    if (w.empty()) {
        throw std::invalid_argument("cylinder needs a nonempty word");
    }
    require_admissible(sys.incidence, w);
    return cylinder_unchecked(sys, w);
}

/// pi(omega) to within tol: iterate until the cylinder diameter bound is
/// below tol, then map the centre of the innermost seed region.
inline point coding_point(const gdms& sys, symbol_stream& stream, double tol) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("coding_point needs tol > 0");
    }
    std::size_t n = 1;
    while (sys.contraction.diameter_bound(n) > tol) {
        ++n;
        if (n > 100000) {
            throw std::runtime_error("coding_point: contraction too weak for the requested tolerance");
        }
    }
    const word w = stream.prefix(n);
    require_admissible(sys.incidence, w);
    const composed_map phi = compose(sys, w);
    return phi(center_of(sys.domain_of(w.back())));
}

struct osc_result {
    bool holds = true;
    std::optional<std::pair<word, word>> violation;
    std::size_t words_checked = 0;
};

/// Numerical OSC evidence at depth n: the shrunken cylinder enclosures of
/// distinct words with the same initial vertex are pairwise disjoint.
inline osc_result check_osc(const gdms& sys, std::size_t n, double tol) {
    if (n == 0) {
        throw std::invalid_argument("check_osc needs depth >= 1");
    }
    const auto words = admissible_words(sys.incidence, sys.alph, n);
    std::vector<cylinder_data> cyl;
    cyl.reserve(words.size());
    for (const auto& w : words) {
        cyl.push_back(cylinder_unchecked(sys, w));
    }
    // Sweep over bounding intervals along the real axis.
    std::vector<std::size_t> order(cyl.size());
    std::vector<double> left(cyl.size());
    std::vector<double> right(cyl.size());
    for (std::size_t k = 0; k < cyl.size(); ++k) {
        order[k] = k;
        const ball b = bounding_ball(cyl[k].image, sys.dim);
        left[k] = b.center.real() - b.radius;
        right[k] = b.center.real() + b.radius;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return left[a] < left[b]; });
    osc_result out;
    out.words_checked = cyl.size();
    std::optional<std::pair<std::size_t, std::size_t>> first;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size() && left[order[j]] <= right[order[i]]; ++j) {
            const auto a = std::min(order[i], order[j]);
            const auto b = std::max(order[i], order[j]);
            if (sys.alph.initial[words[a].front()] != sys.alph.initial[words[b].front()]) {
                continue;
            }
            if (!interiors_disjoint(cyl[a].image, cyl[b].image, sys.dim, tol)) {
                if (!first || std::make_pair(a, b) < *first) {
                    first = std::make_pair(a, b);
                }
            }
        }
    }
    if (first) {
        out.holds = false;
        out.violation = std::make_pair(words[first->first], words[first->second]);
    }
    return out;
}

struct point_sample {
    int dim = 1;
    std::vector<point> points;
    std::vector<double> weights;
    std::vector<word> words;
    bool normalized = true;

    std::size_t size() const { return points.size(); }
};

/// pi-images of uniformly random admissible words of length `depth`. With
/// an exponent s the weights are proportional to dmax^s of each cylinder.
inline point_sample sample_limit_set(const gdms& sys, std::size_t count, std::size_t depth, std::uint64_t seed,
                                     std::optional<double> exponent = std::nullopt, unsigned threads = 1) {
    point_sample out;
    out.dim = sys.dim;
    if (count == 0) {
        return out;
    }
    if (depth == 0) {
        throw std::invalid_argument("sample depth must be >= 1");
    }
    const std::size_t n = sys.edge_count();
    // ways[k][e]: number of admissible words of length k + 1 starting with e.
    std::vector<std::vector<double>> ways(depth, std::vector<double>(n, 1.0));
    for (std::size_t k = 1; k < depth; ++k) {
        for (std::size_t e = 0; e < n; ++e) {
            double s = 0.0;
            for (std::size_t f = 0; f < n; ++f) {
                if (sys.incidence(e, f)) {
                    s += ways[k - 1][f];
                }
            }
            ways[k][e] = s;
        }
    }
    out.points.resize(count);
    out.weights.resize(count);
    out.words.resize(count);
    parallel_for(count, threads, [&](std::size_t i) {
        auto rng = indexed_rng(seed, i);
        word w;
        w.reserve(depth);
        for (std::size_t k = 0; k < depth; ++k) {
            const auto& row = ways[depth - 1 - k];
            double total = 0.0;
            for (std::size_t f = 0; f < n; ++f) {
                if (w.empty() || sys.incidence(w.back(), f)) {
                    total += row[f];
                }
            }
            double u = uniform01(rng) * total;
            std::size_t pick = n;
            for (std::size_t f = 0; f < n; ++f) {
                if (w.empty() || sys.incidence(w.back(), f)) {
                    pick = f;
                    if (u < row[f]) {
                        break;
                    }
                    u -= row[f];
                }
            }
            w.push_back(pick);
        }
        const composed_map phi = compose(sys, w);
        out.points[i] = phi(center_of(sys.domain_of(w.back())));
        out.weights[i] = exponent ? std::pow(cylinder_unchecked(sys, w).dmax, *exponent) : 1.0;
        out.words[i] = std::move(w);
    });
    compensated_sum total;
    for (double x : out.weights) {
        total.add(x);
    }
    for (double& x : out.weights) {
        x /= total.value();
    }
    return out;
}

/// Every admissible word of length `depth`, mapped at the seed centres.
inline point_sample enumerate_limit_set(const gdms& sys, std::size_t depth) {
    point_sample out;
    out.dim = sys.dim;
    for (auto& w : admissible_words(sys.incidence, sys.alph, depth)) {
        out.points.push_back(compose(sys, w)(center_of(sys.domain_of(w.back()))));
        out.words.push_back(std::move(w));
    }
    out.weights.assign(out.points.size(), out.points.empty() ? 0.0 : 1.0 / static_cast<double>(out.points.size()));
    return out;
}

}  // namespace cifs
