#pragma once

// Badly approximable diagnostics: the quality c(x, Q), continued fractions
// and digit-bound certificates, and sample statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cifs/gdms.hpp"
#include "cifs/parallel.hpp"

namespace cifs {

inline constexpr std::uint64_t max_ba_horizon = 10'000'000;

struct ba_profile {
    std::vector<double> x;  // d coordinates
    std::uint64_t horizon = 0;
    double quality = 0.0;  // min_{1 <= q <= Q} q^{1/d} dist(q x, Z^d)
    std::uint64_t best_q = 0;
    // The same minimum restricted to ceil(sqrt(Q)) <= q <= Q; it tracks the
    // asymptotic constant liminf q^{1/d} dist(q x, Z^d).
    double tail_quality = 0.0;
    std::uint64_t tail_q = 0;
};

namespace detail {

/// |q x - round(q x)| computed with a fused multiply-add, so the only error
/// is the representation error of x itself.
inline double lattice_distance(double x, std::uint64_t q) {
    const double qd = static_cast<double>(q);
    const double n = std::nearbyint(qd * x);
    return std::abs(std::fma(qd, x, -n));
}

inline void check_horizon(std::uint64_t Q) {
    if (Q < 1) {
        throw std::invalid_argument("horizon Q must be >= 1");
    }
    if (Q > max_ba_horizon) {
        throw std::invalid_argument("horizon Q is capped at 10^7");
    }
}

inline std::uint64_t tail_start(std::uint64_t Q) {
    return static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(Q))));
}

}  // namespace detail

inline ba_profile ba_quality(double x, std::uint64_t Q) {
    detail::check_horizon(Q);
    ba_profile out;
    out.x = {x};
    out.horizon = Q;
    out.quality = INFINITY;
    out.tail_quality = INFINITY;
    const std::uint64_t q0 = detail::tail_start(Q);
    for (std::uint64_t q = 1; q <= Q; ++q) {
        const double v = static_cast<double>(q) * detail::lattice_distance(x, q);
        if (v < out.quality) {
            out.quality = v;
            out.best_q = q;
        }
        if (q >= q0 && v < out.tail_quality) {
            out.tail_quality = v;
            out.tail_q = q;
        }
    }
    return out;
}

/// Sup-norm version for d = 2.
inline ba_profile ba_quality(point xy, std::uint64_t Q) {
    detail::check_horizon(Q);
    ba_profile out;
    out.x = {xy.real(), xy.imag()};
    out.horizon = Q;
    out.quality = INFINITY;
    out.tail_quality = INFINITY;
    const std::uint64_t q0 = detail::tail_start(Q);
    for (std::uint64_t q = 1; q <= Q; ++q) {
        const double dist = std::max(detail::lattice_distance(xy.real(), q), detail::lattice_distance(xy.imag(), q));
        const double v = std::sqrt(static_cast<double>(q)) * dist;
        if (v < out.quality) {
            out.quality = v;
            out.best_q = q;
        }
        if (q >= q0 && v < out.tail_quality) {
            out.tail_quality = v;
            out.tail_q = q;
        }
    }
    return out;
}

/// Exact quality of the rational p / q (integer arithmetic throughout).
inline ba_profile ba_quality_rational(std::int64_t p, std::int64_t q, std::uint64_t Q) {
    detail::check_horizon(Q);
    if (q <= 0) {
        throw std::invalid_argument("denominator must be positive");
    }
    ba_profile out;
    out.x = {static_cast<double>(p) / static_cast<double>(q)};
    out.horizon = Q;
    out.quality = INFINITY;
    out.tail_quality = INFINITY;
    const std::uint64_t q0 = detail::tail_start(Q);
    const auto den = static_cast<std::uint64_t>(q);
    const auto num = static_cast<std::uint64_t>(((p % q) + q) % q);
    for (std::uint64_t k = 1; k <= Q; ++k) {
        const std::uint64_t rem = static_cast<std::uint64_t>((static_cast<unsigned __int128>(k) * num) % den);
        const std::uint64_t near = std::min(rem, den - rem);
        const double v = static_cast<double>(k) * static_cast<double>(near) / static_cast<double>(den);
        if (v < out.quality) {
            out.quality = v;
            out.best_q = k;
        }
        if (k >= q0 && v < out.tail_quality) {
            out.tail_quality = v;
            out.tail_q = k;
        }
        if (near == 0 && out.tail_quality == 0.0) {
            break;
        }
    }
    return out;
}

struct cf_certificate {
    std::vector<std::uint64_t> digits;
    std::uint64_t bound = 0;  // M = max digit
    double c_bound = 0.0;     // 1 / (M + 2)^2
    bool truncated = false;   // fewer digits than requested
    std::string reason;
};

inline cf_certificate make_certificate(std::vector<std::uint64_t> digits) {
    cf_certificate out;
    out.digits = std::move(digits);
    for (auto a : out.digits) {
        if (a < 1) {
            throw std::invalid_argument("partial quotients must be >= 1");
        }
        out.bound = std::max(out.bound, a);
    }
    const double m2 = static_cast<double>(out.bound) + 2.0;
    out.c_bound = 1.0 / (m2 * m2);
    return out;
}

/// Gauss-map digits of x in (0, 1) in long double, tracking the interval
/// of values consistent with the input and stopping once a digit is no
/// longer determined.
inline cf_certificate cf_expand(double x, std::size_t n) {
    if (!(x > 0.0 && x < 1.0)) {
        throw std::invalid_argument("cf_expand needs x in (0, 1)");
    }
    if (n == 0) {
        throw std::invalid_argument("cf_expand needs n >= 1");
    }
    std::vector<std::uint64_t> digits;
    long double lo = static_cast<long double>(x) * (1.0L - 0x1.0p-53L);
    long double hi = static_cast<long double>(x) * (1.0L + 0x1.0p-53L);
    long double v = x;
    std::string reason;
    while (digits.size() < n) {
        if (v <= 0.0L) {
            reason = "expansion terminated (rational input)";
            break;
        }
        const long double inv = 1.0L / v;
        const long double a = std::floor(inv);
        if (std::floor(1.0L / hi) != std::floor(1.0L / lo) || a > 1.0e18L) {
            reason = "precision exhausted";
            break;
        }
        digits.push_back(static_cast<std::uint64_t>(a));
        v = inv - a;
        const long double nlo = 1.0L / hi - a;
        const long double nhi = 1.0L / lo - a;
        const long double slack = std::max(std::abs(v), 1.0L) * 0x1.0p-62L;
        lo = nlo - slack;
        hi = nhi + slack;
        if (lo <= 0.0L && digits.size() < n) {
            if (v <= 0.0L || hi <= 0.0L) {
                reason = "expansion terminated (rational input)";
            } else {
                reason = "precision exhausted";
            }
            break;
        }
    }
    auto out = make_certificate(std::move(digits));
    if (out.digits.size() < n) {
        out.truncated = true;
        out.reason = reason;
    }
    return out;
}

/// Convergent numerators and denominators p_k / q_k of [0; a_1, ..., a_n].
inline std::vector<std::array<long double, 2>> convergents(const std::vector<std::uint64_t>& digits) {
    std::vector<std::array<long double, 2>> out;
    long double p0 = 1.0L, q0 = 0.0L;  // p_{-1}, q_{-1}
    long double p1 = 0.0L, q1 = 1.0L;  // p_0, q_0
    for (auto a : digits) {
        const long double p = static_cast<long double>(a) * p1 + p0;
        const long double q = static_cast<long double>(a) * q1 + q0;
        out.push_back({p, q});
        p0 = p1;
        q0 = q1;
        p1 = p;
        q1 = q;
    }
    return out;
}

/// [0; a_1, ..., a_n] evaluated from the inside out.
inline long double evaluate_cf(const std::vector<std::uint64_t>& digits) {
    long double v = 0.0L;
    for (std::size_t k = digits.size(); k-- > 0;) {
        v = 1.0L / (static_cast<long double>(digits[k]) + v);
    }
    return v;
}

struct gauss_point_certificate {
    cf_certificate certificate;
    double x = 0.0;  // coding point of the periodic extension of the word
};

/// The Gauss-IFS coding point of w w w ... has partial quotients equal to
/// the letters of w, so 1 / (M + 2)^2 bounds its quality from below.
inline gauss_point_certificate ba_certify_gauss_point(const std::vector<std::uint64_t>& word_digits) {
    if (word_digits.empty()) {
        throw std::invalid_argument("empty word defines no point");
    }
    gauss_point_certificate out;
    out.certificate = make_certificate(word_digits);
    std::vector<std::uint64_t> expanded;
    while (expanded.size() < 96) {
        expanded.insert(expanded.end(), word_digits.begin(), word_digits.end());
    }
    out.x = static_cast<double>(evaluate_cf(expanded));
    return out;
}

struct ba_summary {
    std::vector<ba_profile> profiles;
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    std::array<std::size_t, 10> histogram{};  // bins of width 0.05 on [0, 0.5]
};

inline ba_summary ba_statistics(const point_sample& sample, std::uint64_t Q, unsigned threads = 1) {
    if (sample.size() == 0) {
        throw std::invalid_argument("ba_statistics needs a nonempty sample");
    }
    ba_summary out;
    out.profiles.resize(sample.size());
    parallel_for(sample.size(), threads, [&](std::size_t k) {
        out.profiles[k] = sample.dim == 1 ? ba_quality(sample.points[k].real(), Q) : ba_quality(sample.points[k], Q);
    });
    std::vector<double> c;
    c.reserve(sample.size());
    for (const auto& p : out.profiles) {
        c.push_back(p.quality);
        const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(p.quality / 0.05));
        ++out.histogram[bin];
    }
    std::sort(c.begin(), c.end());
    out.min = c.front();
    out.max = c.back();
    out.median = c.size() % 2 ? c[c.size() / 2] : 0.5 * (c[c.size() / 2 - 1] + c[c.size() / 2]);
    return out;
}

}  // namespace cifs
