#pragma once

// Topological pressure enclosures and dimension estimates: Bowen root for
// finite systems, the Moran closed form, and finite-subsystem suprema.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cifs/gdms.hpp"
#include "cifs/numeric.hpp"
#include "cifs/parallel.hpp"
#include "cifs/symbolic.hpp"

namespace cifs {

struct pressure_estimate {
    double t = 0.0;
    std::size_t depth = 0;
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
    double midpoint() const { return 0.5 * (lower + upper); }
};

struct pressure_options {
    double word_cap = default_enumeration_cap;  // max words per depth table
    double grid_budget = 4.0e6;                 // max (word, grid point) pairs for the operator bound
    unsigned threads = 1;
};

/// Caches t-independent cylinder data per depth so that pressure can be
/// evaluated at many parameters cheaply.
///
/// Two enclosures are intersected:
///  * cylinder sums: P <= min_{k | n} (1/k) log sum dmax^t (subadditive) and
///    P >= (1/n) log sum dmin^t (over loops when A is not full);
///  * transfer-operator ratios: with h = Z_{m-1}, L h = Z_m where
///    Z_m(f, x) = sum over m-words ending in f of |phi_w'(x)|^t, and
///    min Z_m / Z_{m-1} <= e^P <= max Z_m / Z_{m-1} over sampled x.
class pressure_engine {
public:
    explicit pressure_engine(const gdms& sys, pressure_options opt = {})
        : sys_(sys), opt_(opt), irreducible_(is_finitely_irreducible(sys.incidence, sys.alph).irreducible) {
        log_min_letter_ = INFINITY;
        for (std::size_t e = 0; e < sys_.edge_count(); ++e) {
            log_min_letter_ = std::min(log_min_letter_, std::log(map_region(sys_.maps[e], sys_.domain_of(e), sys_.dim).dmin));
        }
    }

    const gdms& system() const { return sys_; }

    /// Largest depth whose cylinder table fits under the word cap.
    std::size_t max_depth(std::size_t limit = 64) const {
        std::size_t n = 0;
        while (n < limit && static_cast<double>(count_admissible_words(sys_.incidence, n + 1)) <= opt_.word_cap) {
            ++n;
        }
        return n;
    }

    pressure_estimate evaluate(double t, std::size_t n) {
        if (n == 0) {
            throw std::invalid_argument("pressure depth must be >= 1");
        }
        if (t < 0.0) {
            throw std::invalid_argument("pressure parameter must be >= 0");
        }
        check_cap(n);
        const auto& tab = table(n);
        double upper = INFINITY;
        for (std::size_t k = 1; k <= n; ++k) {
            if (n % k == 0) {
                upper = std::min(upper, log_sum_exp(table(k).log_dmax, t) / static_cast<double>(k));
            }
        }
        double lower = -INFINITY;
        if (sys_.incidence.all_ones()) {
            lower = log_sum_exp(tab.log_dmin, t) / static_cast<double>(n);
        } else {
            for (const auto& loops : tab.loops) {
                lower = std::max(lower, log_sum_exp(loops, t) / static_cast<double>(n));
            }
        }
        if (const auto* g = operator_table(n)) {
            const auto [cw_lo, cw_hi] = operator_bounds(*g, t);
            if (irreducible_) {
                lower = std::max(lower, cw_lo);
            }
            upper = std::min(upper, cw_hi);
        }
        if (lower > upper) {
            std::swap(lower, upper);
        }
        return {t, n, lower, upper};
    }

    /// log min_e inf |phi_e'| over X_t(e).
    double log_min_letter_derivative() const { return log_min_letter_; }

    /// log max over n-words of sup |phi_w'|.
    double log_max_word_derivative(std::size_t n) {
        check_cap(n);
        const auto& d = table(n).log_dmax;
        return *std::max_element(d.begin(), d.end());
    }

private:
    struct level {
        std::vector<double> log_dmin;
        std::vector<double> log_dmax;
        std::vector<std::uint32_t> first;
        std::vector<std::uint32_t> last;
        // log dmin of the words e...g with A(g, e) = 1, grouped by e
        std::vector<std::vector<double>> loops;
    };

    // Sampled log-derivatives of every word of lengths m - 1 and m at the
    // evaluation grid of X_t(f), grouped by the innermost letter f.
    struct grid_level {
        std::size_t depth = 0;
        std::vector<std::size_t> grid_size;                 // per innermost letter
        std::vector<std::vector<std::vector<double>>> logs;  // [0: m-1, 1: m][f] -> word-major, grid-minor
    };

    void check_cap(std::size_t n) const {
        const auto words = static_cast<double>(count_admissible_words(sys_.incidence, n));
        if (words > opt_.word_cap) {
            throw enumeration_too_large("enumeration too large: " + std::to_string(words) + " words at depth " +
                                        std::to_string(n));
        }
    }

    const level& table(std::size_t n) {
        auto it = levels_.find(n);
        if (it != levels_.end()) {
            return it->second;
        }
        const std::size_t edges = sys_.edge_count();
        std::vector<level> parts(edges);
        parallel_for(edges, opt_.threads, [&](std::size_t f) {
            level& out = parts[f];
            std::function<void(std::size_t, std::size_t, const region&, double, double)> grow =
                [&](std::size_t outer, std::size_t len, const region& r, double lmin, double lmax) {
                    if (len == n) {
                        out.log_dmin.push_back(lmin);
                        out.log_dmax.push_back(lmax);
                        out.first.push_back(static_cast<std::uint32_t>(outer));
                        out.last.push_back(static_cast<std::uint32_t>(f));
                        return;
                    }
                    for (std::size_t e = 0; e < edges; ++e) {
                        if (sys_.incidence(e, outer)) {
                            const auto m = map_region(sys_.maps[e], r, sys_.dim);
                            grow(e, len + 1, m.image, lmin + std::log(m.dmin), lmax + std::log(m.dmax));
                        }
                    }
                };
            const auto m = map_region(sys_.maps[f], sys_.domain_of(f), sys_.dim);
            grow(f, 1, m.image, std::log(m.dmin), std::log(m.dmax));
        });
        level all;
        for (auto& p : parts) {
            all.log_dmin.insert(all.log_dmin.end(), p.log_dmin.begin(), p.log_dmin.end());
            all.log_dmax.insert(all.log_dmax.end(), p.log_dmax.begin(), p.log_dmax.end());
            all.first.insert(all.first.end(), p.first.begin(), p.first.end());
            all.last.insert(all.last.end(), p.last.begin(), p.last.end());
        }
        all.loops.resize(edges);
        for (std::size_t w = 0; w < all.first.size(); ++w) {
            if (sys_.incidence(all.last[w], all.first[w])) {
                all.loops[all.first[w]].push_back(all.log_dmin[w]);
            }
        }
        return levels_.emplace(n, std::move(all)).first->second;
    }

    /// Deepest grid table with m <= n that fits the budget (m >= 2), or null.
    const grid_level* operator_table(std::size_t n) {
        std::size_t grid = 0;
        for (const auto& v : sys_.vertices) {
            grid = std::max(grid, evaluation_grid(v.seed, sys_.dim).size());
        }
        std::size_t m = n;
        while (m >= 2 && static_cast<double>(count_admissible_words(sys_.incidence, m)) * static_cast<double>(grid) >
                             opt_.grid_budget) {
            --m;
        }
        if (m < 2) {
            return nullptr;
        }
        if (grid_ && grid_->depth == m) {
            return &*grid_;
        }
        grid_level g;
        g.depth = m;
        const std::size_t edges = sys_.edge_count();
        g.grid_size.resize(edges);
        g.logs.assign(2, std::vector<std::vector<double>>(edges));
        parallel_for(edges, opt_.threads, [&](std::size_t f) {
            const auto x = evaluation_grid(sys_.domain_of(f), sys_.dim);
            g.grid_size[f] = x.size();
            std::function<void(std::size_t, std::size_t, const std::vector<point>&, const std::vector<double>&)> grow =
                [&](std::size_t outer, std::size_t len, const std::vector<point>& pts, const std::vector<double>& logs) {
                    if (len + 1 >= m) {
                        auto& dst = g.logs[len + 1 - m][f];
                        dst.insert(dst.end(), logs.begin(), logs.end());
                        if (len == m) {
                            return;
                        }
                    }
                    std::vector<point> next(pts.size());
                    std::vector<double> nlogs(pts.size());
                    for (std::size_t e = 0; e < edges; ++e) {
                        if (sys_.incidence(e, outer)) {
                            for (std::size_t k = 0; k < pts.size(); ++k) {
                                nlogs[k] = logs[k] + std::log(derivative_abs(sys_.maps[e], pts[k]));
                                next[k] = cifs::apply(sys_.maps[e], pts[k]);
                            }
                            grow(e, len + 1, next, nlogs);
                        }
                    }
                };
            std::vector<point> pts(x.size());
            std::vector<double> logs(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) {
                logs[k] = std::log(derivative_abs(sys_.maps[f], x[k]));
                pts[k] = cifs::apply(sys_.maps[f], x[k]);
            }
            grow(f, 1, pts, logs);
        });
        grid_ = std::move(g);
        return &*grid_;
    }

    std::pair<double, double> operator_bounds(const grid_level& g, double t) const {
        double lo = INFINITY;
        double hi = -INFINITY;
        bool positive = true;
        std::vector<double> column;
        for (std::size_t f = 0; f < g.grid_size.size(); ++f) {
            const std::size_t gs = g.grid_size[f];
            for (std::size_t k = 0; k < gs; ++k) {
                double z[2];
                for (int lvl = 0; lvl < 2; ++lvl) {
                    const auto& src = g.logs[lvl][f];
                    column.clear();
                    for (std::size_t w = k; w < src.size(); w += gs) {
                        column.push_back(src[w]);
                    }
                    z[lvl] = log_sum_exp(column, t);
                }
                if (!std::isfinite(z[0])) {
                    positive = false;
                    continue;
                }
                const double ratio = z[1] - z[0];
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
        if (!positive) {
            hi = INFINITY;
        }
        return {lo, hi};
    }

    gdms sys_;
    pressure_options opt_;
    bool irreducible_;
    double log_min_letter_;
    std::map<std::size_t, level> levels_;
    std::optional<grid_level> grid_;
};

inline pressure_estimate pressure(const gdms& sys, double t, std::size_t n, pressure_options opt = {}) {
    pressure_engine engine(sys, opt);
    return engine.evaluate(t, n);
}

struct dimension_estimate {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::string method;
    std::size_t depth = 0;
    std::size_t iterations = 0;
    bool resolved = true;
    double width() const { return hi - lo; }
};

struct bowen_options {
    double tol = 1e-8;
    std::size_t max_depth = 40;
    pressure_options pressure;
};

/// Zero of t -> P(t) on [0, d + 1]. Roots of the lower and upper pressure
/// bounds bracket the true zero; enclosures from successive depths are
/// intersected, so deeper runs never widen them.
inline dimension_estimate bowen_root(const gdms& sys, bowen_options opt = {}) {
    pressure_engine engine(sys, opt.pressure);
    const double top = static_cast<double>(sys.dim) + 1.0;
    const double root_tol = std::max(opt.tol * 0.1, 1e-15);
    dimension_estimate out;
    out.method = "bowen_bisect";
    out.lo = 0.0;
    out.hi = top;
    out.resolved = false;
    const std::size_t deepest = engine.max_depth(opt.max_depth);
    if (deepest == 0) {
        throw enumeration_too_large("enumeration too large even at depth 1");
    }
    for (std::size_t n = 1; n <= deepest; ++n) {
        auto lower = [&](double t) { return engine.evaluate(t, n).lower; };
        auto upper = [&](double t) { return engine.evaluate(t, n).upper; };
        double lo = 0.0;
        double hi = top;
        if (upper(0.0) <= 0.0) {
            hi = 0.0;
        } else if (upper(top) > 0.0) {
            hi = top;
        } else {
            const auto b = shrink_sign_change(upper, 0.0, top, root_tol);
            hi = b.hi;
            out.iterations += b.iterations;
        }
        if (lower(0.0) > 0.0 && hi > 0.0) {
            const double start = std::min(hi, top);
            if (lower(start) <= 0.0) {
                const auto b = shrink_sign_change(lower, 0.0, start, root_tol);
                lo = b.lo;
                out.iterations += b.iterations;
            } else {
                lo = start;
            }
        }
        out.lo = std::max(out.lo, lo);
        out.hi = std::min(out.hi, hi);
        if (out.lo > out.hi) {
            // Rounding at the last digit; collapse to the tighter side.
            out.lo = out.hi = 0.5 * (out.lo + out.hi);
        }
        out.depth = n;
        if (out.hi - out.lo <= opt.tol) {
            out.resolved = true;
            break;
        }
    }
    out.value = 0.5 * (out.lo + out.hi);
    return out;
}

/// Unique s with sum r_i^s = 1.
inline dimension_estimate moran_dimension(const std::vector<double>& ratios) {
    if (ratios.empty()) {
        throw std::invalid_argument("moran_dimension needs at least one ratio");
    }
    double rmax = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0 && r < 1.0)) {
            throw std::invalid_argument("Moran ratios must lie in (0, 1)");
        }
        rmax = std::max(rmax, r);
    }
    dimension_estimate out;
    out.method = "moran";
    if (ratios.size() == 1) {
        return out;
    }
    auto excess = [&](double s) {
        compensated_sum sum;
        for (double r : ratios) {
            sum.add(std::pow(r, s));
        }
        return sum.value() - 1.0;
    };
    double lo = 0.0;
    double hi = std::log(static_cast<double>(ratios.size())) / std::log(1.0 / rmax);
    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (excess(mid) > 0.0 ? lo : hi) = mid;
        ++out.iterations;
    }
    out.lo = lo;
    out.hi = hi;
    out.value = 0.5 * (lo + hi);
    return out;
}

struct filtration_result {
    std::vector<dimension_estimate> levels;
    bool monotone = true;
    dimension_estimate supremum;  // a lower bound for the full system, never its value
};

/// Bowen roots of the nested finite subsystems (at most `budget` of them).
inline filtration_result dimension_infinite(const gdms& sys, std::size_t budget, bowen_options opt = {}) {
    if (sys.filtration.empty()) {
        throw std::invalid_argument("system has no filtration");
    }
    filtration_result out;
    const std::size_t count = std::min(budget, sys.filtration.size());
    for (std::size_t k = 0; k < count; ++k) {
        out.levels.push_back(bowen_root(subsystem(sys, sys.filtration[k]), opt));
    }
    for (std::size_t k = 1; k < out.levels.size(); ++k) {
        if (out.levels[k].value + 2.0 * opt.tol < out.levels[k - 1].value) {
            out.monotone = false;
        }
    }
    out.supremum.method = "subsystem_sup";
    for (const auto& d : out.levels) {
        if (d.lo >= out.supremum.lo) {
            out.supremum.lo = d.lo;
            out.supremum.value = d.value;
            out.supremum.depth = d.depth;
            out.supremum.resolved = d.resolved;
        }
        out.supremum.iterations += d.iterations;
    }
    out.supremum.hi = static_cast<double>(sys.dim);
    return out;
}

struct pressure_check {
    pressure_estimate at_t;
    pressure_estimate at_t_plus_u;
    double lower = 0.0;  // bound for P(t + u)
    double upper = 0.0;
    bool holds = false;
    bool exact = false;  // bounds coincide with each other and with P(t + u)
};

/// P(t) - u log sup|f'| <= P(t+u) <= P(t) - (u/n) log inf|(f^n)'|, where f
/// is the expanding inverse system, so |f'| = 1 / |phi'|.
inline pressure_check pressure_bounds_check(pressure_engine& engine, double t, double u, std::size_t n) {
    if (u < 0.0) {
        throw std::invalid_argument("pressure_bounds_check needs u >= 0");
    }
    constexpr double slack = 1e-12;
    pressure_check out;
    out.at_t = engine.evaluate(t, n);
    out.at_t_plus_u = engine.evaluate(t + u, n);
    out.lower = out.at_t.lower + u * engine.log_min_letter_derivative();
    out.upper = out.at_t.upper + u * engine.log_max_word_derivative(n) / static_cast<double>(n);
    out.holds = out.at_t_plus_u.upper >= out.lower - slack && out.at_t_plus_u.lower <= out.upper + slack;
    out.exact = std::abs(out.upper - out.lower) <= slack && std::abs(out.at_t_plus_u.lower - out.lower) <= slack &&
                std::abs(out.at_t_plus_u.upper - out.upper) <= slack;
    return out;
}

inline pressure_check pressure_bounds_check(const gdms& sys, double t, double u, std::size_t n) {
    pressure_engine engine(sys);
    return pressure_bounds_check(engine, t, u, n);
}

}  // namespace cifs
