#pragma once

// Hyperplane diffuseness, absolute decay and the explicit constants of the
// diffuse-implies-decaying argument.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cifs/measure.hpp"
#include "cifs/numeric.hpp"
#include "cifs/parallel.hpp"
#include "cifs/strip.hpp"

namespace cifs {

/// Best-fitting hyperplane of a finite set: the midpoint of the extremes in
/// d = 1, the exact minimum-width strip in d = 2.
inline strip minimax_hyperplane(const std::vector<point>& pts, int dim) {
    if (dim == 1) {
        double lo = INFINITY;
        double hi = -INFINITY;
        for (point p : pts) {
            lo = std::min(lo, p.real());
            hi = std::max(hi, p.real());
        }
        return strip{point{1.0, 0.0}, 0.5 * (lo + hi), 0.5 * (hi - lo)};
    }
    return min_width_strip(pts);
}

struct diffuseness_entry {
    point center{};
    double radius = 0.0;
    double gamma = 0.0;
    std::size_t points = 0;
};

struct diffuseness_report {
    std::vector<double> scales;
    std::vector<double> gamma_by_scale;  // inf over centres, NaN when every ball was skipped
    std::vector<diffuseness_entry> entries;
    std::vector<std::string> skipped;
    double gamma = INFINITY;
    diffuseness_entry witness;  // configuration attaining gamma
};

inline constexpr std::size_t min_points_per_ball = 50;

/// gamma(x, r) = half-width of the minimax hyperplane of J cap B(x, r), over r.
inline diffuseness_report estimate_diffuseness(const empirical_measure& mu, const std::vector<double>& scales,
                                               std::size_t center_count, std::uint64_t seed, unsigned threads = 1) {
    diffuseness_report out;
    out.scales = scales;
    std::vector<point> centers;
    const std::size_t distinct = mu.points().size();
    for (std::size_t k = 0; k < center_count && distinct > 0; ++k) {
        auto rng = indexed_rng(seed, k);
        centers.push_back(mu.points()[uniform_index(rng, distinct)]);
    }
    const std::size_t total = centers.size() * scales.size();
    std::vector<diffuseness_entry> cells(total);
    std::vector<char> ok(total, 0);
    parallel_for(total, threads, [&](std::size_t idx) {
        const point x = centers[idx / scales.size()];
        const double r = scales[idx % scales.size()];
        auto [pts, count] = mu.support_in_ball(x, r);
        cells[idx].center = x;
        cells[idx].radius = r;
        cells[idx].points = count;
        if (count < min_points_per_ball) {
            return;
        }
        cells[idx].gamma = minimax_hyperplane(pts, mu.dim()).half_width / r;
        ok[idx] = 1;
    });
    out.gamma_by_scale.assign(scales.size(), INFINITY);
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!ok[idx]) {
            out.skipped.push_back("ball at (" + std::to_string(cells[idx].center.real()) + "," +
                                  std::to_string(cells[idx].center.imag()) + ") r=" +
                                  std::to_string(cells[idx].radius) + " holds " + std::to_string(cells[idx].points) +
                                  " points");
            continue;
        }
        auto& g = out.gamma_by_scale[idx % scales.size()];
        g = std::min(g, cells[idx].gamma);
        if (cells[idx].gamma < out.gamma) {
            out.gamma = cells[idx].gamma;
            out.witness = cells[idx];
        }
        out.entries.push_back(cells[idx]);
    }
    for (double& g : out.gamma_by_scale) {
        if (!std::isfinite(g)) {
            g = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

inline double alpha_from(double epsilon, double K) { return -std::log1p(-epsilon) / std::log(K); }

struct decay_constants_result {
    double K = 0.0;
    double epsilon = 0.0;
    double alpha = 0.0;
    unsigned doublings = 0;
};

/// K = 2 (gamma + 2) / gamma, epsilon = 1 / (1 + C^m) with m doublings from
/// radius gamma r / 2 up to 5r, alpha = -log(1 - epsilon) / log K.
inline decay_constants_result decay_constants(double gamma, double doubling_constant) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("decay_constants needs gamma > 0");
    }
    if (!(doubling_constant >= 1.0)) {
        throw std::invalid_argument("decay_constants needs a doubling constant >= 1");
    }
    decay_constants_result out;
    out.K = 2.0 * (gamma + 2.0) / gamma;
    out.doublings = static_cast<unsigned>(std::max(0.0, std::ceil(std::log2(10.0 / gamma))));
    out.epsilon = 1.0 / (1.0 + std::pow(doubling_constant, out.doublings));
    out.alpha = alpha_from(out.epsilon, out.K);
    return out;
}

struct decay_trial {
    point center{};
    double radius = 0.0;
    strip line;
    std::vector<double> ratios;  // one per epsilon
};

struct decay_report {
    std::vector<double> epsilons;
    std::vector<double> envelope;  // max ratio per epsilon
    std::vector<decay_trial> trials;
    double alpha = 0.0;
    double C = 0.0;
    bool all_below_one = true;  // at every epsilon <= 0.1
    bool decays = false;
    std::size_t skipped = 0;
};

struct decay_options {
    std::optional<strip> fixed_line;  // otherwise the local minimax line and a random line through x
    double max_radius_fraction = 0.25;
    double min_radius_fraction = 1.0 / 64.0;
    unsigned threads = 1;
};

/// Mass ratios mu(N(L, eps r) cap B(x, r)) / mu(B(x, r)) over sampled
/// configurations, with a power-law fit of the per-epsilon envelope.
inline decay_report verify_decay(const empirical_measure& mu, std::size_t trials, const std::vector<double>& epsilons,
                                 std::uint64_t seed, decay_options opt = {}) {
    if (epsilons.empty()) {
        throw std::invalid_argument("verify_decay needs an epsilon grid");
    }
    decay_report out;
    out.epsilons = epsilons;
    const double eps_min = *std::min_element(epsilons.begin(), epsilons.end());
    const double diam = mu.diameter();
    const double r_hi = opt.max_radius_fraction * diam;
    const double r_lo = std::max({opt.min_radius_fraction * diam, mu.resolution(), mu.spacing() / eps_min});
    std::vector<decay_trial> raw(trials);
    std::vector<char> ok(trials, 0);
    parallel_for(trials, opt.threads, [&](std::size_t k) {
        auto rng = indexed_rng(seed, k);
        const point x = mu.points()[uniform_index(rng, mu.points().size())];
        const double u = uniform01(rng);
        const double angle = 2.0 * std::numbers::pi * uniform01(rng);
        const bool random_line = uniform01(rng) < 0.5;
        if (!(r_lo < r_hi)) {
            return;
        }
        const double r = r_hi * std::pow(r_lo / r_hi, u);
        decay_trial t;
        t.center = x;
        t.radius = r;
        const double ball = mu.mass_unchecked(x, r);
        if (opt.fixed_line) {
            t.line = *opt.fixed_line;
        } else if (random_line && mu.dim() == 2) {
            t.line.normal = std::polar(1.0, angle);
            t.line.offset = x.real() * t.line.normal.real() + x.imag() * t.line.normal.imag();
        } else {
            t.line = minimax_hyperplane(mu.support_in_ball(x, r).first, mu.dim());
        }
        for (double eps : epsilons) {
            t.ratios.push_back(mu.slab_mass(x, r, t.line, eps * r) / ball);
        }
        raw[k] = std::move(t);
        ok[k] = 1;
    });
    out.envelope.assign(epsilons.size(), 0.0);
    for (std::size_t k = 0; k < trials; ++k) {
        if (!ok[k]) {
            ++out.skipped;
            continue;
        }
        for (std::size_t j = 0; j < epsilons.size(); ++j) {
            out.envelope[j] = std::max(out.envelope[j], raw[k].ratios[j]);
            if (epsilons[j] <= 0.1 && raw[k].ratios[j] >= 1.0) {
                out.all_below_one = false;
            }
        }
        out.trials.push_back(std::move(raw[k]));
    }
    if (out.trials.empty()) {
        out.all_below_one = false;
        return out;
    }
    // log envelope = log C + alpha log eps, least squares over positive entries.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t j = 0; j < epsilons.size(); ++j) {
        if (out.envelope[j] > 0.0) {
            const double x = std::log(epsilons[j]);
            const double y = std::log(out.envelope[j]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            m += 1;
        }
    }
    if (m >= 2 && m * sxx - sx * sx > 0.0) {
        out.alpha = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        out.C = 0.0;
        for (std::size_t j = 0; j < epsilons.size(); ++j) {
            out.C = std::max(out.C, out.envelope[j] / std::pow(epsilons[j], out.alpha));
        }
    }
    out.decays = out.alpha > 0.05 && out.all_below_one;
    return out;
}

struct claim_report {
    std::size_t evaluated = 0;
    std::size_t passed = 0;
    std::size_t skipped = 0;
    decay_constants_result constants;
    double pass_rate() const { return evaluated ? static_cast<double>(passed) / static_cast<double>(evaluated) : 0.0; }
};

/// Checks mu(S1) <= (1 - eps)^n mu(S2) with S1 = B(p, R) cap N(L, r) and
/// S2 = B(p, R + (2/gamma) sum_{j<n} K^j r) cap N(L, K^n r).
inline claim_report verify_claim_iteration(const empirical_measure& mu, double gamma, double doubling_constant,
                                           unsigned n, std::size_t trials, std::uint64_t seed, unsigned threads = 1,
                                           std::optional<strip> fixed_line = std::nullopt) {
    claim_report out;
    out.constants = decay_constants(gamma, doubling_constant);
    const double K = out.constants.K;
    double grow = 0.0;
    for (unsigned j = 0; j < n; ++j) {
        grow += std::pow(K, j);
    }
    grow *= 2.0 / gamma;
    const double factor = std::pow(1.0 - out.constants.epsilon, n);
    const double diam = mu.diameter();
    std::vector<int> verdict(trials, -1);
    parallel_for(trials, threads, [&](std::size_t k) {
        auto rng = indexed_rng(seed, k);
        const point p = mu.points()[uniform_index(rng, mu.points().size())];
        const double R = diam * std::pow(2.0, -1.0 - 3.0 * uniform01(rng));
        const double r_hi = grow > 0.0 ? std::min(R, 0.5 * R / grow) : R;
        const double r_lo = std::max(mu.spacing(), 1e-12 * R);
        const double u = uniform01(rng);
        const double angle = 2.0 * std::numbers::pi * uniform01(rng);
        const bool random_line = uniform01(rng) < 0.5;
        if (!(r_lo < r_hi)) {
            return;
        }
        const double r = r_hi * std::pow(r_lo / r_hi, u);
        const double big = R + grow * r;
        if (big > diam) {
            return;
        }
        strip line;
        if (fixed_line) {
            line = *fixed_line;
        } else if (random_line && mu.dim() == 2) {
            line.normal = std::polar(1.0, angle);
            line.offset = p.real() * line.normal.real() + p.imag() * line.normal.imag();
        } else {
            line = minimax_hyperplane(mu.support_in_ball(p, R).first, mu.dim());
        }
        const double s1 = mu.slab_mass(p, R, line, r);
        const double s2 = mu.slab_mass(p, big, line, std::pow(K, n) * r);
        verdict[k] = s1 <= factor * s2 ? 1 : 0;
    });
    for (int v : verdict) {
        if (v < 0) {
            ++out.skipped;
        } else {
            ++out.evaluated;
            out.passed += static_cast<std::size_t>(v);
        }
    }
    return out;
}

}  // namespace cifs
