#pragma once

// Command-line surface: subcommand dispatch, report bodies and CSV output.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cifs/ba.hpp"
#include "cifs/config.hpp"
#include "cifs/diffuse.hpp"
#include "cifs/irreducibility.hpp"
#include "cifs/julia.hpp"
#include "cifs/measure.hpp"
#include "cifs/pressure.hpp"

namespace cifs {

enum exit_status : int { exit_ok = 0, exit_usage = 1, exit_validation = 2, exit_unresolved = 3 };

/// Fixed formatting with 17 significant digits, so reruns are byte-stable.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct run_report {
    std::string command;
    std::string config_hash = "none";
    std::uint64_t seed = 1;
    std::vector<std::pair<std::string, std::string>> fields;
    int exit_code = exit_ok;
    double wall_seconds = 0.0;  // kept out of the body
    std::filesystem::path out_dir;

    void add(const std::string& key, const std::string& value) { fields.emplace_back(key, value); }
    void add(const std::string& key, double value) { add(key, fmt(value)); }
    void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }

    std::string value_of(const std::string& key) const {
        for (const auto& [k, v] : fields) {
            if (k == key) {
                return v;
            }
        }
        return {};
    }

    std::string body() const {
        std::string out = "command=" + command + "\nconfig_hash=" + config_hash + "\nseed=" + std::to_string(seed) + "\n";
        for (const auto& [k, v] : fields) {
            out += k + "=" + v + "\n";
        }
        out += "exit_code=" + std::to_string(exit_code) + "\n";
        return out;
    }
};

class csv_writer {
public:
    explicit csv_writer(const std::filesystem::path& path) : out_(path) {
        if (!out_) {
            throw std::runtime_error("cannot write " + path.string());
        }
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            out_ << (k ? "," : "") << cells[k];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

namespace detail {

inline std::string word_text(const gdms& sys, const word& w) {
    std::string out;
    for (std::size_t k = 0; k < w.size(); ++k) {
        out += (k ? "." : "") + sys.alph.edges[w[k]];
    }
    return out;
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(std::stod(item));
    }
    return out;
}

inline point parse_complex(const std::string& text) {
    const auto v = parse_list(text);
    if (v.empty() || v.size() > 2) {
        throw std::invalid_argument("expected 're' or 're,im', got '" + text + "'");
    }
    return {v[0], v.size() == 2 ? v[1] : 0.0};
}

/// x[,y][,weight] rows; a non-numeric first line is taken as a header.
inline point_sample read_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error({path + ": cannot open sample file"});
    }
    point_sample out;
    std::string line;
    std::vector<std::string> header;
    bool first = true;
    std::size_t line_no = 0;
    int weight_col = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (first) {
            first = false;
            char* end = nullptr;
            std::strtod(cells[0].c_str(), &end);
            if (end == cells[0].c_str()) {
                header = cells;
                for (std::size_t k = 0; k < header.size(); ++k) {
                    if (header[k] == "weight") {
                        weight_col = static_cast<int>(k);
                    }
                    if (header[k] == "y") {
                        out.dim = 2;
                    }
                }
                continue;
            }
            out.dim = cells.size() >= 2 ? 2 : 1;
        }
        try {
            const double x = std::stod(cells.at(0));
            const double y = out.dim == 2 ? std::stod(cells.at(1)) : 0.0;
            out.points.emplace_back(x, y);
            out.weights.push_back(weight_col >= 0 ? std::stod(cells.at(static_cast<std::size_t>(weight_col))) : 1.0);
        } catch (const std::exception&) {
            throw config_error({path + ": line " + std::to_string(line_no) + ": malformed row"});
        }
    }
    if (out.points.empty()) {
        throw config_error({path + ": no sample rows"});
    }
    return out;
}

/// Named reals accepted by --x.
inline std::optional<double> named_constant(const std::string& name) {
    static const std::map<std::string, double> table = {
        {"golden", std::numbers::phi - 1.0},
        {"sqrt2", std::numbers::sqrt2 - 1.0},
        {"sqrt3", std::numbers::sqrt3 - 1.0},
        {"e", std::numbers::e - 2.0},
        {"pi", std::numbers::pi - 3.0},
    };
    auto it = table.find(name);
    if (it == table.end()) {
        return std::nullopt;
    }
    return it->second;
}

}  // namespace detail

struct cli_state {
    std::uint64_t seed = 1;
    std::string out = "cifs_out";
    unsigned threads = 1;

    std::string system_path;
    std::string sample_path;
    std::size_t count = 4000;
    std::size_t depth = 12;
    std::optional<double> exponent;

    double tol = 1e-8;
    std::size_t max_depth = 40;
    std::size_t budget = 64;

    std::string x;
    std::string y;
    std::uint64_t Q = 1'000'000;
    std::size_t cf_n = 20;

    std::size_t centers = 64;
    int k_min = 2;
    int k_max = 7;
    std::size_t trials = 1000;
    std::string eps = "0.1,0.05,0.025,0.0125,0.00625";
    unsigned claim_n = 0;
    std::size_t n_scales = 8;
    double r_max_frac = 0.125;
    double r_min_frac = 1.0 / 256.0;

    std::string c = "0";
    std::string center = "0";
    double radius = 0.5;
    std::size_t branch_depth = 1;
    double julia_tol = 1e-6;
    std::size_t julia_max_depth = 12;
    std::size_t julia_budget = 4;
    std::size_t julia_points = 4000;

    std::size_t osc_depth = 4;
    std::size_t fit_depth = 8;
};

namespace detail {

struct command_context {
    cli_state& st;
    run_report& rep;
    std::filesystem::path dir;

    gdms load_system() {
        if (st.system_path.empty()) {
            throw config_error({"missing --system"});
        }
        gdms sys = parse_config(st.system_path);
        rep.config_hash = hex64(config_hash(sys));
        return sys;
    }

    point_sample load_sample() {
        if (!st.sample_path.empty()) {
            auto s = read_sample_csv(st.sample_path);
            std::string canon;
            for (std::size_t k = 0; k < s.size(); ++k) {
                canon += fmt(s.points[k].real()) + "," + fmt(s.points[k].imag()) + "," + fmt(s.weights[k]) + "\n";
            }
            rep.config_hash = hex64(fnv1a(canon));
            return s;
        }
        const gdms sys = load_system();
        return sample_limit_set(sys, st.count, st.depth, st.seed, st.exponent, st.threads);
    }
};

inline void cmd_dim(command_context& cx) {
    const gdms sys = cx.load_system();
    bowen_options opt;
    opt.tol = cx.st.tol;
    opt.max_depth = cx.st.max_depth;
    opt.pressure.threads = cx.st.threads;
    cx.rep.add("edges", sys.edge_count());
    cx.rep.add("dimension_space", static_cast<std::size_t>(sys.dim));
    csv_writer dims(cx.dir / "dimension.csv");
    dims.row({"level", "edges", "value", "lo", "hi", "method", "depth", "resolved"});
    auto record = [&](const std::string& level, std::size_t edges, const dimension_estimate& d) {
        dims.row({level, std::to_string(edges), fmt(d.value), fmt(d.lo), fmt(d.hi), d.method, std::to_string(d.depth),
                  d.resolved ? "true" : "false"});
    };
    dimension_estimate final;
    if (!sys.filtration.empty()) {
        const auto fr = dimension_infinite(sys, cx.st.budget, opt);
        for (std::size_t k = 0; k < fr.levels.size(); ++k) {
            record(std::to_string(k + 1), sys.filtration[k].size(), fr.levels[k]);
            cx.rep.add("level_" + std::to_string(k + 1), fr.levels[k].value);
        }
        cx.rep.add("filtration_levels", fr.levels.size());
        cx.rep.add("filtration_monotone", fr.monotone);
        cx.rep.add("supremum_lower_bound", fr.supremum.value);
        final = fr.supremum;
        final.resolved = true;
        for (const auto& d : fr.levels) {
            final.resolved = final.resolved && d.resolved;
        }
    } else {
        final = bowen_root(sys, opt);
        record("full", sys.edge_count(), final);
        bool similarities = sys.vertices.size() == 1;
        std::vector<double> ratios;
        for (const auto& m : sys.maps) {
            if (const auto* s = std::get_if<similarity>(&m)) {
                ratios.push_back(s->ratio);
            } else {
                similarities = false;
            }
        }
        if (similarities && sys.incidence == incidence_matrix::maximal(sys.alph)) {
            const auto moran = moran_dimension(ratios);
            record("moran", sys.edge_count(), moran);
            cx.rep.add("moran", moran.value);
        }
    }
    cx.rep.add("method", final.method);
    cx.rep.add("dimension", final.value);
    cx.rep.add("lo", final.lo);
    cx.rep.add("hi", final.hi);
    cx.rep.add("depth", final.depth);
    cx.rep.add("resolved", final.resolved);
    cx.rep.add("exceeds_codimension_one", final.value > static_cast<double>(sys.dim - 1));
    if (sys.filtration.empty()) {
        pressure_engine engine(sys, opt.pressure);
        csv_writer pcsv(cx.dir / "pressure.csv");
        pcsv.row({"t", "n", "lo", "hi"});
        for (std::size_t n = 1; n <= final.depth; ++n) {
            const auto p = engine.evaluate(final.value, n);
            pcsv.row({fmt(final.value), std::to_string(n), fmt(p.lower), fmt(p.upper)});
        }
    }
    if (!final.resolved) {
        cx.rep.exit_code = exit_unresolved;
    }
}

inline void cmd_sample(command_context& cx) {
    const gdms sys = cx.load_system();
    const auto s = sample_limit_set(sys, cx.st.count, cx.st.depth, cx.st.seed, cx.st.exponent, cx.st.threads);
    csv_writer out(cx.dir / "sample.csv");
    if (sys.dim == 1) {
        out.row({"x", "weight", "word"});
    } else {
        out.row({"x", "y", "weight", "word"});
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
        std::vector<std::string> row{fmt(s.points[k].real())};
        if (sys.dim == 2) {
            row.push_back(fmt(s.points[k].imag()));
        }
        row.push_back(fmt(s.weights[k]));
        row.push_back(word_text(sys, s.words[k]));
        out.row(row);
    }
    cx.rep.add("points", s.size());
    cx.rep.add("depth", cx.st.depth);
}

inline std::string digits_text(const std::vector<std::uint64_t>& digits) {
    std::string out;
    for (std::size_t k = 0; k < digits.size(); ++k) {
        out += (k ? " " : "") + std::to_string(digits[k]);
    }
    return out;
}

inline void write_profile(csv_writer& out, const ba_profile& p, const std::string& digits) {
    std::vector<std::string> row;
    for (double v : p.x) {
        row.push_back(fmt(v));
    }
    row.insert(row.end(), {std::to_string(p.horizon), fmt(p.quality), std::to_string(p.best_q), fmt(p.tail_quality),
                           std::to_string(p.tail_q), digits});
    out.row(row);
}

inline void cmd_ba(command_context& cx) {
    const std::uint64_t Q = cx.st.Q;
    detail::check_horizon(Q);
    if (!cx.st.x.empty()) {
        csv_writer out(cx.dir / "ba.csv");
        const auto slash = cx.st.x.find('/');
        ba_profile p;
        std::string digits;
        if (!cx.st.y.empty()) {
            const double x = named_constant(cx.st.x).value_or(0.0);
            const double y = named_constant(cx.st.y).value_or(0.0);
            p = ba_quality(point{named_constant(cx.st.x) ? x : std::stod(cx.st.x),
                                 named_constant(cx.st.y) ? y : std::stod(cx.st.y)},
                           Q);
            out.row({"x", "y", "Q", "c", "q_star", "tail_c", "tail_q", "digits"});
        } else if (slash != std::string::npos) {
            const auto p_num = std::stoll(cx.st.x.substr(0, slash));
            const auto q_den = std::stoll(cx.st.x.substr(slash + 1));
            p = ba_quality_rational(p_num, q_den, Q);
            out.row({"x", "Q", "c", "q_star", "tail_c", "tail_q", "digits"});
        } else {
            const double x = named_constant(cx.st.x) ? *named_constant(cx.st.x) : std::stod(cx.st.x);
            p = ba_quality(x, Q);
            const double frac = x - std::floor(x);
            if (frac > 0.0) {
                digits = digits_text(cf_expand(frac, cx.st.cf_n).digits);
            }
            out.row({"x", "Q", "c", "q_star", "tail_c", "tail_q", "digits"});
        }
        write_profile(out, p, digits);
        cx.rep.add("x", cx.st.x);
        cx.rep.add("Q", std::to_string(Q));
        cx.rep.add("c", p.quality);
        cx.rep.add("q_star", std::to_string(p.best_q));
        cx.rep.add("tail_c", p.tail_quality);
        cx.rep.add("tail_q", std::to_string(p.tail_q));
        return;
    }
    std::optional<gdms> sys;
    point_sample s;
    if (cx.st.sample_path.empty()) {
        sys = cx.load_system();
        s = sample_limit_set(*sys, cx.st.count, cx.st.depth, cx.st.seed, cx.st.exponent, cx.st.threads);
    } else {
        s = cx.load_sample();
    }
    const auto summary = ba_statistics(s, Q, cx.st.threads);
    // Gauss letters k give partial quotients directly.
    bool gauss = sys.has_value() && sys->dim == 1;
    std::vector<std::uint64_t> letter_digit;
    if (gauss) {
        for (const auto& m : sys->maps) {
            const auto* mb = std::get_if<moebius>(&m);
            if (!mb || mb->a != point{} || mb->b != point{1.0, 0.0} || mb->c != point{1.0, 0.0}) {
                gauss = false;
                break;
            }
            letter_digit.push_back(static_cast<std::uint64_t>(mb->d.real()));
        }
    }
    csv_writer out(cx.dir / "ba.csv");
    if (s.dim == 1) {
        out.row({"x", "Q", "c", "q_star", "tail_c", "tail_q", "digits"});
    } else {
        out.row({"x", "y", "Q", "c", "q_star", "tail_c", "tail_q", "digits"});
    }
    std::uint64_t bound = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        std::string digits;
        if (gauss) {
            std::vector<std::uint64_t> d;
            for (auto e : s.words[k]) {
                d.push_back(letter_digit[e]);
                bound = std::max(bound, letter_digit[e]);
            }
            digits = digits_text(d);
        }
        write_profile(out, summary.profiles[k], digits);
    }
    csv_writer hist(cx.dir / "ba_histogram.csv");
    hist.row({"bin_lo", "bin_hi", "count"});
    for (std::size_t b = 0; b < summary.histogram.size(); ++b) {
        hist.row({fmt(0.05 * static_cast<double>(b)), b == 9 ? "inf" : fmt(0.05 * static_cast<double>(b + 1)),
                  std::to_string(summary.histogram[b])});
    }
    cx.rep.add("points", s.size());
    cx.rep.add("Q", std::to_string(Q));
    cx.rep.add("c_min", summary.min);
    cx.rep.add("c_median", summary.median);
    cx.rep.add("c_max", summary.max);
    if (gauss) {
        const double m2 = static_cast<double>(bound) + 2.0;
        cx.rep.add("digit_bound", std::to_string(bound));
        cx.rep.add("certificate_c", 1.0 / (m2 * m2));
    }
}

inline void cmd_cf(command_context& cx) {
    if (cx.st.x.empty()) {
        throw config_error({"missing --x"});
    }
    const double x = named_constant(cx.st.x) ? *named_constant(cx.st.x) : std::stod(cx.st.x);
    const double frac = x - std::floor(x);
    const auto cert = cf_expand(frac, cx.st.cf_n);
    const auto conv = convergents(cert.digits);
    csv_writer out(cx.dir / "cf.csv");
    out.row({"k", "a_k", "p_k", "q_k"});
    for (std::size_t k = 0; k < cert.digits.size(); ++k) {
        char p[40];
        char q[40];
        std::snprintf(p, sizeof p, "%.0Lf", conv[k][0]);
        std::snprintf(q, sizeof q, "%.0Lf", conv[k][1]);
        out.row({std::to_string(k + 1), std::to_string(cert.digits[k]), p, q});
    }
    cx.rep.add("x", cx.st.x);
    cx.rep.add("integer_part", fmt(std::floor(x)));
    cx.rep.add("digits", digits_text(cert.digits));
    cx.rep.add("digit_bound", std::to_string(cert.bound));
    cx.rep.add("c_bound", cert.c_bound);
    cx.rep.add("truncated", cert.truncated);
    if (cert.truncated) {
        cx.rep.add("reason", cert.reason);
    }
}

inline std::vector<double> dyadic_scales(double diam, int k_min, int k_max) {
    std::vector<double> out;
    for (int k = k_min; k <= k_max; ++k) {
        out.push_back(diam * std::ldexp(1.0, -k));
    }
    return out;
}

inline void cmd_diffuse(command_context& cx) {
    const empirical_measure mu(cx.load_sample());
    const auto scales = dyadic_scales(mu.diameter(), cx.st.k_min, cx.st.k_max);
    const auto rep = estimate_diffuseness(mu, scales, cx.st.centers, cx.st.seed, cx.st.threads);
    csv_writer out(cx.dir / "diffuse.csv");
    out.row({"scale", "gamma"});
    std::size_t positive = 0;
    for (std::size_t k = 0; k < scales.size(); ++k) {
        out.row({fmt(scales[k]), fmt(rep.gamma_by_scale[k])});
        positive += rep.gamma_by_scale[k] > 0.0;
    }
    cx.rep.add("scales", scales.size());
    cx.rep.add("gamma", rep.gamma);
    cx.rep.add("scales_with_data", scales.size() - static_cast<std::size_t>(std::count_if(
                                                        rep.gamma_by_scale.begin(), rep.gamma_by_scale.end(),
                                                        [](double g) { return std::isnan(g); })));
    cx.rep.add("skipped_balls", rep.skipped.size());
    if (std::isfinite(rep.gamma)) {
        cx.rep.add("witness_x", rep.witness.center.real());
        cx.rep.add("witness_y", rep.witness.center.imag());
        cx.rep.add("witness_r", rep.witness.radius);
    }
}

inline void cmd_decay(command_context& cx) {
    const empirical_measure mu(cx.load_sample());
    const auto eps = parse_list(cx.st.eps);
    decay_options opt;
    opt.threads = cx.st.threads;
    const auto rep = verify_decay(mu, cx.st.trials, eps, cx.st.seed, opt);
    csv_writer out(cx.dir / "decay.csv");
    out.row({"trial", "x", "y", "r", "eps", "ratio"});
    for (std::size_t k = 0; k < rep.trials.size(); ++k) {
        const auto& t = rep.trials[k];
        for (std::size_t j = 0; j < eps.size(); ++j) {
            out.row({std::to_string(k), fmt(t.center.real()), fmt(t.center.imag()), fmt(t.radius), fmt(eps[j]),
                     fmt(t.ratios[j])});
        }
    }
    cx.rep.add("trials", rep.trials.size());
    cx.rep.add("skipped", rep.skipped);
    cx.rep.add("alpha", rep.alpha);
    cx.rep.add("C", rep.C);
    cx.rep.add("all_below_one", rep.all_below_one);
    cx.rep.add("decays", rep.decays);
    for (std::size_t j = 0; j < eps.size(); ++j) {
        cx.rep.add("envelope_" + fmt(eps[j]), rep.envelope[j]);
    }
    if (cx.st.claim_n > 0) {
        const auto scales = dyadic_scales(mu.diameter(), cx.st.k_min, cx.st.k_max);
        const auto diff = estimate_diffuseness(mu, scales, cx.st.centers, cx.st.seed, cx.st.threads);
        const auto dbl = doubling_fit(mu, scales, cx.st.centers, cx.st.seed);
        cx.rep.add("gamma", diff.gamma);
        cx.rep.add("doubling_constant", dbl.constant);
        if (diff.gamma > 0.0 && std::isfinite(diff.gamma)) {
            for (unsigned n = 1; n <= cx.st.claim_n; ++n) {
                const auto claim = verify_claim_iteration(mu, diff.gamma, dbl.constant, n, cx.st.trials,
                                                          cx.st.seed, cx.st.threads);
                const std::string tag = "claim_n" + std::to_string(n) + "_";
                cx.rep.add(tag + "K", claim.constants.K);
                cx.rep.add(tag + "epsilon", claim.constants.epsilon);
                cx.rep.add(tag + "evaluated", claim.evaluated);
                cx.rep.add(tag + "pass_rate", claim.pass_rate());
            }
        } else {
            cx.rep.add("claim", "skipped (gamma is zero)");
        }
    }
}

inline void cmd_ahlfors(command_context& cx) {
    const empirical_measure mu(cx.load_sample());
    const double diam = mu.diameter();
    const auto scales = geometric_scales(cx.st.r_max_frac * diam, cx.st.r_min_frac * diam, cx.st.n_scales);
    const auto fit = ahlfors_fit(mu, scales, cx.st.centers, cx.st.seed);
    const auto dbl = doubling_fit(mu, scales, cx.st.centers, cx.st.seed);
    const auto centers = interior_centers(mu, *std::max_element(scales.begin(), scales.end()), cx.st.centers,
                                          cx.st.seed);
    csv_writer out(cx.dir / "ahlfors.csv");
    out.row({"r", "mean_log_mass"});
    for (double r : scales) {
        if (r < mu.resolution()) {
            continue;
        }
        compensated_sum s;
        for (point x : centers) {
            s.add(std::log(mu.mass(x, r)));
        }
        out.row({fmt(r), fmt(s.value() / static_cast<double>(centers.size()))});
    }
    cx.rep.add("delta", fit.delta);
    cx.rep.add("constant", fit.constant);
    cx.rep.add("residual", fit.residual);
    cx.rep.add("centers", fit.centers);
    cx.rep.add("scales", fit.scales);
    cx.rep.add("doubling_constant", dbl.constant);
    cx.rep.add("resolution", mu.resolution());
}

inline void cmd_julia_ifs(command_context& cx) {
    const quadratic_map f{parse_complex(cx.st.c)};
    const auto bs = build_branch_system(f, parse_complex(cx.st.center), cx.st.radius, cx.st.branch_depth, cx.st.threads);
    cx.rep.add("c", cx.st.c);
    cx.rep.add("branches", bs.branches.size());
    if (bs.empty()) {
        cx.rep.add("status", "no branch maps the ball strictly inside itself");
        cx.rep.exit_code = exit_validation;
        return;
    }
    {
        std::ofstream js(cx.dir / "system.json");
        js << emit_config(bs.system);
    }
    cx.rep.config_hash = hex64(config_hash(bs.system));
    bowen_options opt;
    opt.tol = cx.st.julia_tol;
    opt.max_depth = cx.st.julia_max_depth;
    opt.pressure.threads = cx.st.threads;
    const auto d = bowen_root(bs.system, opt);
    cx.rep.add("dimension", d.value);
    cx.rep.add("lo", d.lo);
    cx.rep.add("hi", d.hi);
    cx.rep.add("depth", d.depth);
    cx.rep.add("resolved", d.resolved);
    if (!d.resolved) {
        cx.rep.exit_code = exit_unresolved;
    }
}

inline void cmd_julia_dim(command_context& cx) {
    const quadratic_map f{parse_complex(cx.st.c)};
    ifs_search_options opt;
    opt.julia_points = cx.st.julia_points;
    opt.seed = cx.st.seed;
    opt.threads = cx.st.threads;
    const auto res = ifs_dimension(f, cx.st.julia_budget, opt);
    csv_writer out(cx.dir / "candidates.csv");
    out.row({"candidate", "edges", "value", "lo", "hi", "note"});
    for (const auto& cand : res.candidates) {
        out.row({cand.description, std::to_string(cand.edges), cand.estimate ? fmt(cand.estimate->value) : "",
                 cand.estimate ? fmt(cand.estimate->lo) : "", cand.estimate ? fmt(cand.estimate->hi) : "", cand.note});
    }
    cx.rep.add("c", cx.st.c);
    cx.rep.add("candidates", res.candidates.size());
    if (res.estimate) {
        cx.rep.add("dimension_lower_bound", res.estimate->lo);
        cx.rep.add("dimension", res.estimate->value);
    } else {
        cx.rep.add("dimension_lower_bound", "none");
        cx.rep.exit_code = exit_unresolved;
    }
}

inline void cmd_check(command_context& cx) {
    const gdms sys = cx.load_system();
    cx.rep.add("valid", true);
    cx.rep.add("edges", sys.edge_count());
    cx.rep.add("vertices", sys.vertices.size());
    cx.rep.add("lambda", sys.contraction.lambda);
    cx.rep.add("contraction_step", sys.contraction.step);
    cx.rep.add("lambda_step", sys.contraction.lambda_step);
    const auto irr = is_finitely_irreducible(sys.incidence, sys.alph);
    const auto prim = is_finitely_primitive(sys.incidence, sys.alph);
    cx.rep.add("finitely_irreducible", irr.irreducible);
    cx.rep.add("finitely_primitive", prim.primitive);
    const auto osc = check_osc(sys, cx.st.osc_depth, 1e-12);
    cx.rep.add("osc_depth", cx.st.osc_depth);
    cx.rep.add("osc_evidence", osc.holds);
    cx.rep.add("osc_words_checked", osc.words_checked);
    if (osc.violation) {
        cx.rep.add("osc_violation", word_text(sys, osc.violation->first) + " | " + word_text(sys, osc.violation->second));
    }
    if (sys.dim == 2) {
        const auto s = sample_limit_set(sys, 400, cx.st.fit_depth, cx.st.seed, std::nullopt, cx.st.threads);
        const auto fit = generalized_sphere_fit(s);
        cx.rep.add("circle_fit_residual", fit.residual);
        cx.rep.add("circle_fit_is_line", fit.is_line);
    }
}

}  // namespace detail

/// Parses argv, runs one subcommand and writes report.txt plus CSVs to the
/// output directory. Never throws; failures become exit codes.
inline run_report run_command(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    cli_state st;
    run_report rep;
    CLI::App app{"Dimension, Diophantine and diffuseness diagnostics for conformal iterated function systems"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", st.seed, "Random seed");
    app.add_option("--out", st.out, "Output directory");
    app.add_option("--threads", st.threads, "Worker threads")->check(CLI::Range(1u, 256u));

    auto add_system = [&](CLI::App* sub, bool required) {
        auto* o = sub->add_option("--system", st.system_path, "System JSON file");
        if (required) {
            o->required();
        }
    };
    auto add_sampling = [&](CLI::App* sub) {
        add_system(sub, false);
        sub->add_option("--sample", st.sample_path, "Point CSV (x[,y][,weight])");
        sub->add_option("--count", st.count, "Sample size");
        sub->add_option("--depth", st.depth, "Word length of sampled points");
        sub->add_option("--exponent", st.exponent, "Weight cylinders by dmax^s");
    };

    std::map<std::string, std::function<void(detail::command_context&)>> handlers;

    auto* dim = app.add_subcommand("dim", "Bowen dimension of a system (filtration levels if present)");
    add_system(dim, true);
    dim->add_option("--tol", st.tol, "Target enclosure width");
    dim->add_option("--max-depth", st.max_depth, "Deepest word length");
    dim->add_option("--budget", st.budget, "Maximum number of filtration levels");
    handlers["dim"] = detail::cmd_dim;

    auto* sample = app.add_subcommand("sample", "Sample the limit set");
    add_system(sample, true);
    sample->add_option("--count", st.count, "Number of points");
    sample->add_option("--depth", st.depth, "Word length");
    sample->add_option("--exponent", st.exponent, "Weight cylinders by dmax^s");
    handlers["sample"] = detail::cmd_sample;

    auto* ba = app.add_subcommand("ba", "Badly approximable quality c(x, Q)");
    ba->add_option("--x", st.x, "Real number, p/q, or golden|sqrt2|sqrt3|e|pi");
    ba->add_option("--y", st.y, "Second coordinate (d = 2)");
    ba->add_option("--Q", st.Q, "Horizon (at most 10^7)");
    ba->add_option("--digits", st.cf_n, "Continued fraction digits to list");
    add_sampling(ba);
    handlers["ba"] = detail::cmd_ba;

    auto* cf = app.add_subcommand("cf", "Continued fraction digits and convergents");
    cf->add_option("--x", st.x, "Real number or named constant")->required();
    cf->add_option("--n", st.cf_n, "Number of digits");
    handlers["cf"] = detail::cmd_cf;

    auto* diffuse = app.add_subcommand("diffuse", "Hyperplane diffuseness over dyadic scales");
    add_sampling(diffuse);
    diffuse->add_option("--centers", st.centers, "Ball centres per scale");
    diffuse->add_option("--k-min", st.k_min, "Largest scale diam * 2^-k_min");
    diffuse->add_option("--k-max", st.k_max, "Smallest scale diam * 2^-k_max");
    handlers["diffuse"] = detail::cmd_diffuse;

    auto* decay = app.add_subcommand("decay", "Absolute decay ratios and the claim iteration");
    add_sampling(decay);
    decay->add_option("--trials", st.trials, "Random configurations");
    decay->add_option("--eps", st.eps, "Comma-separated epsilon grid");
    decay->add_option("--claim-n", st.claim_n, "Also check the claim iteration for n = 1..N");
    decay->add_option("--centers", st.centers, "Centres for the gamma and doubling estimates");
    decay->add_option("--k-min", st.k_min, "Largest dyadic scale exponent");
    decay->add_option("--k-max", st.k_max, "Smallest dyadic scale exponent");
    handlers["decay"] = detail::cmd_decay;

    auto* ahlfors = app.add_subcommand("ahlfors", "Ahlfors regularity and doubling fits");
    add_sampling(ahlfors);
    ahlfors->add_option("--centers", st.centers, "Ball centres");
    ahlfors->add_option("--n-scales", st.n_scales, "Number of radii");
    ahlfors->add_option("--r-max", st.r_max_frac, "Largest radius as a fraction of the diameter");
    ahlfors->add_option("--r-min", st.r_min_frac, "Smallest radius as a fraction of the diameter");
    handlers["ahlfors"] = detail::cmd_ahlfors;

    auto* jifs = app.add_subcommand("julia-ifs", "Inverse-branch system of z^2 + c on a ball");
    jifs->add_option("--c", st.c, "Parameter re[,im]");
    jifs->add_option("--center", st.center, "Ball centre re[,im]");
    jifs->add_option("--radius", st.radius, "Ball radius");
    jifs->add_option("--depth", st.branch_depth, "Branch depth");
    jifs->add_option("--tol", st.julia_tol, "Dimension tolerance");
    jifs->add_option("--max-depth", st.julia_max_depth, "Deepest word length");
    handlers["julia-ifs"] = detail::cmd_julia_ifs;

    auto* jdim = app.add_subcommand("julia-dim", "Lower bound for the IFS dimension of z^2 + c");
    jdim->add_option("--c", st.c, "Parameter re[,im]");
    jdim->add_option("--budget", st.julia_budget, "Number of candidate systems");
    jdim->add_option("--julia-points", st.julia_points, "Backward-orbit sample size");
    handlers["julia-dim"] = detail::cmd_julia_dim;

    auto* check = app.add_subcommand("check", "Validate a system and collect structural evidence");
    add_system(check, true);
    check->add_option("--osc-depth", st.osc_depth, "Word length for the open set condition check");
    check->add_option("--depth", st.fit_depth, "Word length for the circle-fit sample");
    handlers["check"] = detail::cmd_check;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        rep.exit_code = app.exit(e, std::cout, err);
        rep.command = "help";
        return rep;
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cout, err);
        rep.exit_code = exit_usage;
        rep.command = "usage_error";
        return rep;
    }

    CLI::App* chosen = app.get_subcommands().front();
    rep.command = chosen->get_name();
    rep.seed = st.seed;
    rep.out_dir = st.out;
    const auto start = std::chrono::steady_clock::now();
    try {
        std::filesystem::create_directories(rep.out_dir);
        detail::command_context cx{st, rep, rep.out_dir};
        handlers.at(rep.command)(cx);
    } catch (const config_error& e) {
        rep.exit_code = exit_validation;
        rep.add("status", "validation_failed");
        for (std::size_t k = 0; k < e.problems().size(); ++k) {
            rep.add("error_" + std::to_string(k + 1), e.problems()[k]);
        }
        err << "validation failed:\n" << e.what() << "\n";
    } catch (const validation_error& e) {
        rep.exit_code = exit_validation;
        rep.add("status", "validation_failed");
        rep.add("error_1", e.what());
        err << "validation failed: " << e.what() << "\n";
    } catch (const std::exception& e) {
        rep.exit_code = exit_validation;
        rep.add("status", "rejected");
        rep.add("error_1", e.what());
        err << "error: " << e.what() << "\n";
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        std::ofstream(rep.out_dir / "report.txt") << rep.body();
    } catch (const std::exception& e) {
        err << "cannot write report: " << e.what() << "\n";
    }
    return rep;
}

}  // namespace cifs
