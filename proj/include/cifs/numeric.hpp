#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>

namespace cifs {

/// Neumaier-compensated running sum.
class compensated_sum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// log(sum_k exp(t * logs[k])) with a fixed summation order.
inline double log_sum_exp(std::span<const double> logs, double t) {
    if (logs.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    double shift = -std::numeric_limits<double>::infinity();
    for (double l : logs) {
        shift = std::max(shift, t * l);
    }
    compensated_sum s;
    for (double l : logs) {
        s.add(std::exp(t * l - shift));
    }
    return shift + std::log(s.value());
}

struct bracket {
    double lo;
    double hi;
    std::size_t iterations = 0;
};

/// Shrinks [lo, hi] around the sign change of a function that is positive
/// at lo and nonpositive at hi (Illinois false position, falling back to
/// bisection). Returns the final bracket; lo stays on the positive side.
inline bracket shrink_sign_change(const std::function<double(double)>& f, double lo, double hi, double tol,
                                  std::size_t max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    int side = 0;
    std::size_t it = 0;
    while (hi - lo > tol && it < max_iter) {
        ++it;
        double x = (std::isfinite(flo) && std::isfinite(fhi) && flo != fhi) ? (lo * fhi - hi * flo) / (fhi - flo)
                                                                            : 0.5 * (lo + hi);
        // Keep the probe well inside the bracket so it always shrinks.
        const double guard = 0.05 * (hi - lo);
        if (!(x > lo + guard && x < hi - guard)) {
            x = 0.5 * (lo + hi);
        }
        const double fx = f(x);
        if (fx > 0.0) {
            lo = x;
            flo = fx;
            if (side == -1) {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == 1) {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    return {lo, hi, it};
}

/// Deterministic per-index generator: the stream for (seed, index) does not
/// depend on how indices are sharded across threads.
inline std::mt19937_64 indexed_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

/// Uniform double in [0, 1) from 53 random bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace cifs
