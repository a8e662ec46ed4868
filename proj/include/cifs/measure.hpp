#pragma once

// Weighted point clouds standing in for measures on limit sets: ball and
// slab mass queries, resolution floor, Ahlfors and doubling fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cifs/gdms.hpp"
#include "cifs/geometry.hpp"
#include "cifs/numeric.hpp"
#include "cifs/strip.hpp"

namespace cifs {

class resolution_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class empirical_measure {
public:
    /// Merges coincident points and normalizes the total mass to 1.
    explicit empirical_measure(const point_sample& sample) : dim_(sample.dim) {
        if (sample.size() == 0) {
            throw std::invalid_argument("empirical measure needs a nonempty sample");
        }
        std::vector<std::size_t> order(sample.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            order[k] = k;
        }
        auto less = [&](std::size_t a, std::size_t b) {
            const point p = sample.points[a];
            const point q = sample.points[b];
            return p.real() < q.real() || (p.real() == q.real() && p.imag() < q.imag());
        };
        std::stable_sort(order.begin(), order.end(), less);
        compensated_sum total;
        for (std::size_t k : order) {
            const double w = sample.weights.empty() ? 1.0 : sample.weights[k];
            if (w < 0.0) {
                throw std::invalid_argument("negative weight in sample");
            }
            total.add(w);
            if (!points_.empty() && points_.back() == sample.points[k]) {
                weights_.back() += w;
                counts_.back() += 1;
            } else {
                points_.push_back(sample.points[k]);
                weights_.push_back(w);
                counts_.push_back(1);
            }
        }
        if (!(total.value() > 0.0)) {
            throw std::invalid_argument("sample has zero total weight");
        }
        for (double& w : weights_) {
            w /= total.value();
        }
        xs_.resize(points_.size());
        for (std::size_t k = 0; k < points_.size(); ++k) {
            xs_[k] = points_[k].real();
        }
        compute_resolution();
    }

    int dim() const { return dim_; }
    const std::vector<point>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t sample_count() const {
        std::size_t n = 0;
        for (auto c : counts_) {
            n += c;
        }
        return n;
    }

    /// Median nearest-neighbour distance between distinct points.
    double spacing() const { return spacing_; }
    /// Smallest trustworthy radius: five times the median spacing.
    double resolution() const { return 5.0 * spacing_; }

    double diameter() const {
        const auto hull = convex_hull(points_);
        double d = 0.0;
        for (std::size_t i = 0; i < hull.size(); ++i) {
            for (std::size_t j = i + 1; j < hull.size(); ++j) {
                d = std::max(d, std::abs(hull[i] - hull[j]));
            }
        }
        return d;
    }

    box bounding_box() const {
        double ylo = INFINITY, yhi = -INFINITY;
        for (point p : points_) {
            ylo = std::min(ylo, p.imag());
            yhi = std::max(yhi, p.imag());
        }
        return {point{xs_.front(), ylo}, point{xs_.back(), yhi}};
    }

    /// mu(closed ball B(x, r)); rejects radii below the resolution floor.
    double mass(point x, double r) const {
        if (r < resolution()) {
            throw resolution_error("ball radius " + std::to_string(r) + " is below the resolution floor " +
                                   std::to_string(resolution()));
        }
        return mass_unchecked(x, r);
    }

    double mass_unchecked(point x, double r) const {
        compensated_sum s;
        for_each_in_ball(x, r, [&](std::size_t k) { s.add(weights_[k]); });
        return s.value();
    }

    /// mu(N(L, thickness) intersected with B(x, r)) for the line (point when
    /// d = 1) through `line.offset` along `line.normal`.
    double slab_mass(point x, double r, const strip& line, double thickness) const {
        compensated_sum s;
        for_each_in_ball(x, r, [&](std::size_t k) {
            if (line.distance(points_[k]) <= thickness) {
                s.add(weights_[k]);
            }
        });
        return s.value();
    }

    /// Distinct support points in B(x, r) and the number of sample points they carry.
    std::pair<std::vector<point>, std::size_t> support_in_ball(point x, double r) const {
        std::vector<point> out;
        std::size_t count = 0;
        for_each_in_ball(x, r, [&](std::size_t k) {
            out.push_back(points_[k]);
            count += counts_[k];
        });
        return {out, count};
    }

private:
    template <class Fn>
    void for_each_in_ball(point x, double r, Fn&& fn) const {
        auto it = std::lower_bound(xs_.begin(), xs_.end(), x.real() - r);
        for (auto k = static_cast<std::size_t>(it - xs_.begin()); k < xs_.size() && xs_[k] <= x.real() + r; ++k) {
            if (std::abs(points_[k] - x) <= r) {
                fn(k);
            }
        }
    }

    void compute_resolution() {
        const std::size_t n = points_.size();
        if (n < 2) {
            spacing_ = 0.0;
            return;
        }
        std::vector<double> nn(n, INFINITY);
        for (std::size_t i = 0; i < n; ++i) {
            double best = INFINITY;
            for (std::size_t j = i + 1; j < n && xs_[j] - xs_[i] < best; ++j) {
                best = std::min(best, std::abs(points_[j] - points_[i]));
            }
            for (std::size_t j = i; j-- > 0 && xs_[i] - xs_[j] < best;) {
                best = std::min(best, std::abs(points_[j] - points_[i]));
            }
            nn[i] = best;
        }
        std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(n / 2), nn.end());
        spacing_ = nn[n / 2];
    }

    int dim_;
    std::vector<point> points_;
    std::vector<double> weights_;
    std::vector<std::size_t> counts_;
    std::vector<double> xs_;
    double spacing_ = 0.0;
};

/// Geometric grid of `count` radii from hi down to lo.
inline std::vector<double> geometric_scales(double hi, double lo, std::size_t count) {
    std::vector<double> out;
    if (count == 1) {
        out.push_back(hi);
        return out;
    }
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(hi * std::pow(lo / hi, static_cast<double>(k) / static_cast<double>(count - 1)));
    }
    return out;
}

/// Support points whose largest ball stays inside the support's bounding box
/// (in every coordinate direction where the support has extent), chosen by
/// a seeded shuffle.
inline std::vector<point> interior_centers(const empirical_measure& mu, double rmax, std::size_t count,
                                           std::uint64_t seed) {
    const box bb = mu.bounding_box();
    const bool flat = bb.hi.imag() - bb.lo.imag() <= 0.0;
    std::vector<point> pool;
    for (point p : mu.points()) {
        const bool inside_x = p.real() - rmax >= bb.lo.real() && p.real() + rmax <= bb.hi.real();
        const bool inside_y = flat || (p.imag() - rmax >= bb.lo.imag() && p.imag() + rmax <= bb.hi.imag());
        if (inside_x && inside_y) {
            pool.push_back(p);
        }
    }
    auto rng = indexed_rng(seed, 0);
    for (std::size_t k = pool.size(); k > 1; --k) {
        std::swap(pool[k - 1], pool[uniform_index(rng, k)]);
    }
    if (pool.size() > count) {
        pool.resize(count);
    }
    return pool;
}

struct ahlfors_result {
    double delta = 0.0;
    double constant = 0.0;  // C with C^-1 r^delta <= mu(B) <= C r^delta on the tested range
    double residual = 0.0;  // max deviation of log mu from the per-centre fit
    std::size_t centers = 0;
    std::size_t scales = 0;
};

/// Pooled slope of log mu(B(x, r)) against log r with a separate intercept
/// per centre (within-centre least squares).
inline ahlfors_result ahlfors_fit(const empirical_measure& mu, const std::vector<double>& scales,
                                  std::size_t center_count = 64, std::uint64_t seed = 1) {
    std::vector<double> radii;
    for (double r : scales) {
        if (r >= mu.resolution()) {
            radii.push_back(r);
        }
    }
    if (radii.size() < 4) {
        throw resolution_error("ahlfors_fit needs at least 4 scales above the resolution floor");
    }
    const double rmax = *std::max_element(radii.begin(), radii.end());
    const auto centers = interior_centers(mu, rmax, center_count, seed);
    if (centers.size() < 20) {
        throw std::invalid_argument("ahlfors_fit needs at least 20 interior centres");
    }
    const std::size_t s = radii.size();
    std::vector<double> lx(s);
    double mx = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
        lx[j] = std::log(radii[j]);
        mx += lx[j] / static_cast<double>(s);
    }
    std::vector<std::vector<double>> ly(centers.size(), std::vector<double>(s));
    std::vector<double> my(centers.size(), 0.0);
    compensated_sum sxy;
    compensated_sum sxx;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t j = 0; j < s; ++j) {
            ly[c][j] = std::log(mu.mass(centers[c], radii[j]));
            my[c] += ly[c][j] / static_cast<double>(s);
        }
        for (std::size_t j = 0; j < s; ++j) {
            sxy.add((lx[j] - mx) * (ly[c][j] - my[c]));
            sxx.add((lx[j] - mx) * (lx[j] - mx));
        }
    }
    ahlfors_result out;
    out.delta = sxy.value() / sxx.value();
    out.centers = centers.size();
    out.scales = s;
    double log_c = 0.0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t j = 0; j < s; ++j) {
            log_c = std::max(log_c, std::abs(ly[c][j] - out.delta * lx[j]));
            out.residual = std::max(out.residual, std::abs(ly[c][j] - my[c] - out.delta * (lx[j] - mx)));
        }
    }
    out.constant = std::exp(log_c);
    return out;
}

struct doubling_result {
    double constant = 1.0;  // max observed mu(B(x, 2r)) / mu(B(x, r))
    std::size_t tests = 0;
};

inline doubling_result doubling_fit(const empirical_measure& mu, const std::vector<double>& scales,
                                    std::size_t center_count = 64, std::uint64_t seed = 1) {
    doubling_result out;
    std::vector<double> radii;
    for (double r : scales) {
        if (r >= mu.resolution()) {
            radii.push_back(r);
        }
    }
    if (radii.empty()) {
        throw resolution_error("doubling_fit has no scale above the resolution floor");
    }
    const double rmax = 2.0 * *std::max_element(radii.begin(), radii.end());
    auto centers = interior_centers(mu, rmax, center_count, seed);
    if (centers.empty()) {
        centers = interior_centers(mu, 0.0, center_count, seed);
    }
    for (point x : centers) {
        for (double r : radii) {
            const double inner = mu.mass(x, r);
            if (inner > 0.0) {
                out.constant = std::max(out.constant, mu.mass(x, 2.0 * r) / inner);
                ++out.tests;
            }
        }
    }
    return out;
}

}  // namespace cifs
