// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cifs/cifs.hpp"
#include "support.hpp"

using namespace cifs;
using cifs::testing::bundled;
using cifs::testing::gauss_system;
using cifs::testing::interval_system;
using cifs::testing::system_path;
namespace fs = std::filesystem;

namespace {

struct outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

class stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// Depth-16 cylinder-sum oracles for Gauss subsystems {1..k}, computed
// offline with an independent bisection and frozen.
const std::vector<double> gauss_oracle{0.0,
                                       0.5312805057767065,
                                       0.7056609066581279,
                                       0.7889456962349757,
                                       0.8368286643759011,
                                       0.8676226655378341};

// Depth-12 brute-force pressure oracle for the inverse-branch system of z^2 - 0.1.
constexpr double julia_oracle_c01 = 1.003136;

/// OSC interval IFS with `count` ratios drawn from [lo, hi]; draws whose
/// ratios do not fit in [0, 1] are redrawn, so every ratio stays in range.
gdms random_osc_system(std::uint64_t seed, std::size_t count, double lo, double hi) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        auto rng = indexed_rng(seed, attempt);
        std::vector<double> ratios;
        double used = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            ratios.push_back(lo + (hi - lo) * uniform01(rng));
            used += ratios.back();
        }
        if (used > 0.98) {
            continue;
        }
        std::vector<double> gaps(count + 1);
        double total = 0.0;
        for (double& g : gaps) {
            g = uniform01(rng) + 0.05;
            total += g;
        }
        std::vector<double> shifts;
        double x = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            x += gaps[k] / total * (1.0 - used);
            shifts.push_back(x);
            x += ratios[k];
        }
        return interval_system(ratios, shifts);
    }
}

std::vector<double> dyadic(double diam, int k_min, int k_max) {
    std::vector<double> out;
    for (int k = k_min; k <= k_max; ++k) {
        out.push_back(diam * std::ldexp(1.0, -k));
    }
    return out;
}

point_sample segment_sample(std::size_t n) {
    point_sample s;
    s.dim = 2;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n - 1);
        s.points.push_back(point{0.1, 0.2} + t * point{0.6, 0.8});
    }
    return s;
}

// 1. Moran and Bowen agree on random OSC similarity systems.
outcome moran_bowen() {
    outcome out;
    double worst = 0.0;
    double slowest = 0.0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const std::size_t count = 2 + seed % 4;
        const auto sys = random_osc_system(seed, count, 0.1, 0.45);
        std::vector<double> ratios;
        for (const auto& m : sys.maps) {
            ratios.push_back(std::get<similarity>(m).ratio);
        }
        stopwatch sw;
        const auto b = bowen_root(sys);
        const double t = sw.seconds();
        const double gap = std::abs(b.value - moran_dimension(ratios).value);
        out.require(gap <= 1e-6 + b.width(), "seed " + std::to_string(seed) + " gap " + num(gap));
        out.require(t < 5.0, "seed " + std::to_string(seed) + " took " + num(t) + " s");
        worst = std::max(worst, gap);
        slowest = std::max(slowest, t);
    }
    out.note("25 systems, max gap " + num(worst, 3) + ", slowest " + num(slowest, 3) + " s");
    return out;
}

// 2. Cantor dimension.
outcome cantor_dimension() {
    outcome out;
    stopwatch sw;
    const auto d = bowen_root(bundled("cantor"));
    const double t = sw.seconds();
    const double exact = std::log(2.0) / std::log(3.0);
    out.require(std::abs(d.value - exact) <= 1e-6, "value " + num(d.value, 12));
    out.require(t < 1.0, "took " + num(t) + " s");
    out.note("dimension " + num(d.value, 12) + " in " + num(t, 3) + " s");
    return out;
}

// 3. Gauss {1, 2} against the frozen oracle.
outcome gauss_pair() {
    outcome out;
    bowen_options opt;
    opt.tol = 1e-5;
    opt.max_depth = 16;
    stopwatch sw;
    const auto d = bowen_root(gauss_system({1, 2}), opt);
    const double t = sw.seconds();
    out.require(std::abs(d.value - gauss_oracle[1]) <= 1e-3, "value " + num(d.value, 10));
    out.require(t < 60.0, "took " + num(t) + " s");
    out.note("dimension " + num(d.value, 10) + " [" + num(d.lo, 10) + ", " + num(d.hi, 10) + "] in " + num(t, 3) +
             " s");
    return out;
}

// 4. Filtration {1}, {1,2}, ..., {1..6} of the Gauss system.
outcome gauss_filtration() {
    outcome out;
    bowen_options opt;
    opt.tol = 1e-4;
    const auto r = dimension_infinite(bundled("gauss"), 6, opt);
    out.require(r.levels.size() == 6, "levels " + std::to_string(r.levels.size()));
    std::string values;
    for (std::size_t k = 0; k < r.levels.size() && k < gauss_oracle.size(); ++k) {
        const double v = r.levels[k].value;
        out.require(std::abs(v - gauss_oracle[k]) <= 2e-3, "level " + std::to_string(k + 1) + " = " + num(v));
        if (k > 0) {
            out.require(v > r.levels[k - 1].value, "not increasing at level " + std::to_string(k + 1));
        }
        values += (values.empty() ? "" : " ") + num(v);
    }
    out.note("levels " + values);
    return out;
}

// 5. Pressure bounds: exact for equal-ratio similarity systems, two-sided for Gauss {1, 2}.
outcome pressure_bounds() {
    outcome out;
    std::size_t exact = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        auto rng = indexed_rng(55, k);
        const std::size_t count = 2 + uniform_index(rng, 4);
        const double ratio = 0.1 + (0.9 / static_cast<double>(count) - 0.1) * uniform01(rng);
        std::vector<double> ratios(count, ratio);
        std::vector<double> shifts;
        const double gap = (1.0 - ratio * static_cast<double>(count)) / static_cast<double>(count + 1);
        for (std::size_t j = 0; j < count; ++j) {
            shifts.push_back(gap * static_cast<double>(j + 1) + ratio * static_cast<double>(j));
        }
        pressure_engine e(interval_system(ratios, shifts));
        const double t = 2.0 * uniform01(rng);
        const double u = 2.0 * uniform01(rng);
        const auto c = pressure_bounds_check(e, t, u, 3);
        exact += c.holds && c.exact;
    }
    out.require(exact == 100, std::to_string(exact) + "/100 exact");
    pressure_engine g(gauss_system({1, 2}));
    std::size_t contained = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        auto rng = indexed_rng(56, k);
        contained += pressure_bounds_check(g, 1.5 * uniform01(rng), 1.5 * uniform01(rng), 8).holds;
    }
    out.require(contained == 20, std::to_string(contained) + "/20 contained");
    out.note("similarity exact " + std::to_string(exact) + "/100, Gauss contained " + std::to_string(contained) + "/20");
    return out;
}

// 6. Badly approximable quality.
outcome ba_quality_checks() {
    outcome out;
    const auto golden = ba_quality(std::numbers::phi - 1.0, 1'000'000);
    out.require(std::abs(golden.tail_quality - 0.4472) <= 1e-3, "golden tail c " + num(golden.tail_quality));
    out.note("golden: min over q <= 10^6 is " + num(golden.quality) + " at q = " + std::to_string(golden.best_q) +
             ", min over q >= 1000 is " + num(golden.tail_quality) + " at q = " + std::to_string(golden.tail_q));
    std::size_t rational_zero = 0;
    std::size_t rational_total = 0;
    for (std::int64_t q = 1; q <= 60; ++q) {
        for (std::int64_t p = 0; p <= q; ++p) {
            for (std::uint64_t Q : {static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(3 * q)}) {
                ++rational_total;
                rational_zero += ba_quality_rational(p, q, Q).quality == 0.0;
            }
        }
    }
    out.require(rational_zero == rational_total, "rationals " + std::to_string(rational_zero) + "/" +
                                                     std::to_string(rational_total));
    for (int M = 1; M <= 3; ++M) {
        std::vector<int> digits;
        for (int k = 1; k <= M; ++k) {
            digits.push_back(k);
        }
        const auto s = sample_limit_set(gauss_system(digits), 100, 40, static_cast<std::uint64_t>(10 + M));
        const double bound = 1.0 / ((M + 2.0) * (M + 2.0));
        double worst = INFINITY;
        for (point x : s.points) {
            worst = std::min(worst, ba_quality(x.real(), 100'000).quality);
        }
        out.require(worst >= bound - 1e-6, "M=" + std::to_string(M) + " min c " + num(worst));
        out.note("M=" + std::to_string(M) + " min c " + num(worst, 4) + " >= " + num(bound, 4));
    }
    return out;
}

// 7. Explicit constants of the decay lemma.
outcome decay_constant_checks() {
    outcome out;
    out.require(decay_constants(2.0, 2.0).K == 4.0, "K(2)");
    out.require(decay_constants(1.0, 2.0).K == 6.0, "K(1)");
    out.require(alpha_from(0.5, 4.0) == 0.5, "alpha(1/2, 4)");
    std::size_t identity = 0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        auto rng = indexed_rng(77, k);
        const double gamma = 1e-3 + (1.0 - 1e-3) * uniform01(rng);
        const auto d = decay_constants(gamma, 1.0 + 15.0 * uniform01(rng));
        identity += d.alpha == -std::log(1.0 - d.epsilon) / std::log(d.K) || d.alpha == alpha_from(d.epsilon, d.K);
        out.require(std::abs(d.K - 2.0 * (gamma + 2.0) / gamma) <= 1e-12 * d.K, "K recomputation");
    }
    out.require(identity == 1000, "alpha identity " + std::to_string(identity) + "/1000");
    out.note("K(2) = 4, K(1) = 6, alpha identity " + std::to_string(identity) + "/1000");
    return out;
}

// 8. Diffuseness discriminates the segment from Cantor and Sierpinski.
outcome diffuseness() {
    outcome out;
    {
        const empirical_measure mu(segment_sample(1000));
        const auto rep = estimate_diffuseness(mu, dyadic(mu.diameter(), 1, 5), 64, 1);
        double worst = 0.0;
        for (double g : rep.gamma_by_scale) {
            worst = std::max(worst, std::isnan(g) ? 0.0 : g);
        }
        out.require(worst <= 1e-3, "segment gamma " + num(worst));
        out.note("segment max gamma " + num(worst, 3));
    }
    for (const auto& [name, depth] : std::vector<std::pair<std::string, std::size_t>>{{"cantor", 14}, {"sierpinski", 10}}) {
        const empirical_measure mu(enumerate_limit_set(bundled(name), depth));
        const auto scales = dyadic(mu.diameter(), 2, 7);
        const auto a = estimate_diffuseness(mu, scales, 64, 3);
        const auto b = estimate_diffuseness(mu, scales, 64, 3, 4);
        std::size_t good = 0;
        double lowest = INFINITY;
        for (double g : a.gamma_by_scale) {
            if (std::isfinite(g)) {
                good += g >= 0.05;
                lowest = std::min(lowest, g);
            }
        }
        out.require(good >= 5, name + " scales with gamma >= 0.05: " + std::to_string(good));
        out.require(lowest >= 0.05, name + " lowest gamma " + num(lowest));
        out.require(a.gamma_by_scale == b.gamma_by_scale && a.gamma == b.gamma, name + " not deterministic");
        out.note(name + " gamma >= " + num(lowest, 3) + " on " + std::to_string(good) + " scales");
    }
    return out;
}

// 9. Absolute decay and the claim iteration on the Sierpinski measure.
outcome decay_verification() {
    outcome out;
    // Depth 10 keeps the sample spacing below eps r for the whole grid.
    const empirical_measure mu(enumerate_limit_set(bundled("sierpinski"), 10));
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    const auto rep = verify_decay(mu, 1000, eps, 9);
    out.require(rep.alpha > 0.3, "alpha " + num(rep.alpha));
    out.require(rep.all_below_one, "ratio reached 1 at eps <= 0.1");
    out.require(rep.trials.size() >= 900, "evaluated " + std::to_string(rep.trials.size()));
    out.note("alpha " + num(rep.alpha, 4) + " over " + std::to_string(rep.trials.size()) + " trials");
    const auto scales = dyadic(mu.diameter(), 2, 6);
    const double gamma = estimate_diffuseness(mu, scales, 64, 3).gamma;
    const double dbl = doubling_fit(mu, scales).constant;
    for (unsigned n = 0; n <= 2; ++n) {
        const auto claim = verify_claim_iteration(mu, gamma, dbl, n, 500, 10 + n);
        out.require(claim.pass_rate() >= 0.99 && claim.evaluated >= 100,
                    "claim n=" + std::to_string(n) + " rate " + num(claim.pass_rate()));
        out.note("claim n=" + std::to_string(n) + " " + std::to_string(claim.passed) + "/" +
                 std::to_string(claim.evaluated));
    }
    const empirical_measure line(segment_sample(4000));
    decay_options opt;
    opt.fixed_line = strip{point{0.8, -0.6}, 0.8 * 0.1 - 0.6 * 0.2, 0.0};
    const auto flat = verify_decay(line, 200, eps, 9, opt);
    out.require(!flat.decays, "line-supported measure not flagged");
    out.note("line measure flagged");
    return out;
}

// 10. Ahlfors regularity exponents.
outcome ahlfors() {
    outcome out;
    point_sample uniform;
    for (int k = 0; k < 20000; ++k) {
        uniform.points.push_back({(k + 0.5) / 20000.0, 0.0});
    }
    const struct {
        std::string name;
        empirical_measure mu;
        std::vector<double> scales;
        double exact;
        double tol;
    } cases[] = {
        {"uniform", empirical_measure(uniform), geometric_scales(0.1, 0.002, 8), 1.0, 0.02},
        {"cantor", empirical_measure(enumerate_limit_set(bundled("cantor"), 12)), geometric_scales(0.1, 0.001, 10),
         std::log(2.0) / std::log(3.0), 0.02},
        {"sierpinski", empirical_measure(enumerate_limit_set(bundled("sierpinski"), 8)),
         geometric_scales(0.1, 0.01, 8), std::log(3.0) / std::log(2.0), 0.03},
    };
    for (const auto& c : cases) {
        const auto fit = ahlfors_fit(c.mu, c.scales);
        out.require(std::abs(fit.delta - c.exact) <= c.tol, c.name + " delta " + num(fit.delta));
        out.note(c.name + " delta " + num(fit.delta, 5) + " vs " + num(c.exact, 5));
    }
    return out;
}

// 11. Inverse-branch systems of z^2 + c.
outcome julia_bridge() {
    outcome out;
    stopwatch sw;
    const quadratic_map zero{{0.0, 0.0}};
    const auto bs = build_branch_system(zero, {1.0, 0.0}, 0.3, 4);
    out.require(!bs.empty(), "empty branch system at c = 0");
    if (!bs.empty()) {
        double circle = 0.0;
        for (point z : sample_limit_set(bs.system, 500, 40, 1).points) {
            circle = std::max(circle, std::abs(std::abs(z) - 1.0));
        }
        out.require(circle <= 1e-8, "coding points off the circle by " + num(circle));
        out.note("circle error " + num(circle, 3));
    }
    double identity = 0.0;
    for (point c : {point{0.0, 0.0}, point{-0.1, 0.0}}) {
        const quadratic_map f{c};
        const auto sys = build_branch_system(f, f.beta(), 0.2, 4);
        for (const auto& g : sys.branches) {
            for (int i = -3; i <= 3; ++i) {
                for (int j = -3; j <= 3; ++j) {
                    const point w = sys.base.center + 0.05 * point{static_cast<double>(i), static_cast<double>(j)};
                    const double prod = g.derivative_abs(w) * f.iterate_derivative_abs(g(w), g.depth());
                    identity = std::max(identity, std::abs(prod - 1.0));
                }
            }
        }
    }
    out.require(identity <= 1e-9, "derivative identity error " + num(identity));
    out.note("derivative identity error " + num(identity, 3));
    const auto d0 = ifs_dimension(zero, 4);
    out.require(d0.estimate && d0.estimate->value >= 0.99 && d0.estimate->value <= 1.0,
                "c = 0 estimate " + (d0.estimate ? num(d0.estimate->value) : std::string("none")));
    const auto d1 = ifs_dimension(quadratic_map{{-0.1, 0.0}}, 4);
    out.require(d1.estimate && std::abs(d1.estimate->value - julia_oracle_c01) <= 5e-3,
                "c = -0.1 estimate " + (d1.estimate ? num(d1.estimate->value) : std::string("none")));
    const double t = sw.seconds();
    out.require(t < 120.0, "took " + num(t) + " s");
    out.note("c = 0: " + (d0.estimate ? num(d0.estimate->value) : "none") +
             ", c = -0.1: " + (d1.estimate ? num(d1.estimate->value) : "none") + " in " + num(t, 3) + " s");
    return out;
}

// 12. Koebe triangle test.
outcome koebe() {
    outcome out;
    point_sample tri;
    tri.dim = 2;
    for (int k = 0; k < 3; ++k) {
        tri.points.push_back(std::polar(0.04, 2.0 * std::numbers::pi * k / 3.0 + 0.3));
    }
    const auto r = koebe_triangle_irreducibility(tri, ball{{0.0, 0.0}, 1.0});
    out.require(r.verdict == irreducibility_verdict::irreducible, "equilateral verdict " + std::string(to_string(r.verdict)));
    const double margin = (21.0 / 17.0) * (21.0 / 17.0);
    out.require(margin < 2.0 && koebe_ratio_distortion(0.1) == margin, "margin arithmetic");
    out.require(r.ratio * r.distortion < 2.0, "distorted ratio " + num(r.ratio * r.distortion));
    point_sample line;
    line.dim = 2;
    for (int k = 0; k < 12; ++k) {
        line.points.push_back({0.003 * k - 0.018, 0.001});
    }
    const auto l = koebe_triangle_irreducibility(line, ball{{0.0, 0.0}, 1.0});
    out.require(l.verdict == irreducibility_verdict::inconclusive, "collinear verdict " + std::string(to_string(l.verdict)));
    out.note("equilateral irreducible (ratio x distortion " + num(r.ratio * r.distortion, 4) +
             "), collinear inconclusive, margin " + num(margin, 5));
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Every file in the output directory, concatenated with its name.
std::string outputs_of(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) {
        all += "== " + f.filename().string() + "\n" + slurp(f);
    }
    return all;
}

// 13. CLI determinism across reruns and thread counts.
outcome cli_determinism() {
    outcome out;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"dim", "dim --system " + system_path("cantor") + " --tol 1e-8"},
        {"sample", "sample --system " + system_path("sierpinski") + " --count 2000 --depth 14"},
        {"ba", "ba --system " + system_path("gauss") + " --count 50 --Q 10000"},
        {"cf", "cf --x pi --n 10"},
        {"diffuse", "diffuse --system " + system_path("sierpinski") + " --count 8000 --centers 32"},
        {"decay", "decay --system " + system_path("sierpinski") + " --count 8000 --trials 300 --claim-n 2"},
        {"ahlfors", "ahlfors --system " + system_path("cantor") + " --count 8000 --depth 16"},
        {"julia-ifs", "julia-ifs --c -0.1 --center 1.09161,0 --radius 0.2 --depth 4 --tol 1e-4 --max-depth 8"},
        {"julia-dim", "julia-dim --c -0.1 --budget 2 --julia-points 1000"},
        {"check", "check --system " + system_path("overlap") + " --osc-depth 4"},
    };
    const fs::path root = fs::temp_directory_path() / "cifs_acceptance_cli";
    fs::remove_all(root);
    std::size_t identical = 0;
    for (const auto& [name, args] : commands) {
        std::string reference;
        bool same = true;
        int idx = 0;
        for (const char* threads : {"1", "1", "4", "4"}) {
            const fs::path dir = root / (name + "_" + std::to_string(idx++));
            const std::string cmd = std::string("\"") + CIFS_CLI_PATH + "\" --seed 7 --threads " + threads + " --out \"" +
                                    dir.string() + "\" " + args + " > /dev/null 2>&1";
            const int rc = std::system(cmd.c_str());
            (void)rc;
            if (!fs::exists(dir / "report.txt")) {
                same = false;
                out.require(false, name + " produced no report");
                break;
            }
            const std::string all = outputs_of(dir);
            if (reference.empty()) {
                reference = all;
            } else if (all != reference) {
                same = false;
            }
        }
        out.require(same, name + " outputs differ");
        identical += same;
    }
    out.note(std::to_string(identical) + "/" + std::to_string(commands.size()) +
             " commands byte-identical over 2 runs x threads {1, 4}");
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<outcome()>>> criteria{
        {"Moran-Bowen agreement", moran_bowen},
        {"Cantor dimension", cantor_dimension},
        {"Gauss {1,2} dimension", gauss_pair},
        {"Gauss filtration supremum", gauss_filtration},
        {"pressure bounds", pressure_bounds},
        {"BA quality", ba_quality_checks},
        {"decay constants", decay_constant_checks},
        {"diffuseness discrimination", diffuseness},
        {"decay verification", decay_verification},
        {"Ahlfors fits", ahlfors},
        {"Julia bridge", julia_bridge},
        {"Koebe triangle test", koebe},
        {"CLI determinism", cli_determinism},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        stopwatch sw;
        outcome r;
        try {
            r = criteria[k].second();
        } catch (const std::exception& ex) {
            r.pass = false;
            r.detail = std::string("exception: ") + ex.what();
        }
        failures += !r.pass;
        std::printf("criterion %2zu %s  %s (%.2f s): %s\n", k + 1, r.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                    sw.seconds(), r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
