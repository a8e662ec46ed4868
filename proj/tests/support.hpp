#pragma once

// Shared fixtures for the test binaries.

#include <string>
#include <vector>

#include "cifs/config.hpp"
#include "cifs/gdms.hpp"
#include "cifs/numeric.hpp"

namespace cifs::testing {

inline std::string system_path(const std::string& name) { return std::string(CIFS_SYSTEMS_DIR) + "/" + name + ".json"; }

inline gdms bundled(const std::string& name) { return parse_config(system_path(name)); }

/// Single-vertex similarity IFS on the seed region `seed`.
inline gdms similarity_system(int dim, region seed, const std::vector<similarity>& maps) {
    gdms sys;
    sys.dim = dim;
    sys.vertices.push_back({"X", seed});
    std::vector<std::string> names;
    for (std::size_t k = 0; k < maps.size(); ++k) {
        names.push_back(std::to_string(k));
        sys.maps.emplace_back(maps[k]);
    }
    sys.alph = alphabet::single_vertex(names);
    sys.incidence = incidence_matrix::ones(maps.size());
    validate_or_throw(sys);
    return sys;
}

inline gdms interval_system(const std::vector<double>& ratios, const std::vector<double>& shifts) {
    std::vector<similarity> maps;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        maps.push_back({ratios[k], 0.0, false, point{shifts[k], 0.0}});
    }
    return similarity_system(1, box{point{0.0, 0.0}, point{1.0, 0.0}}, maps);
}

/// Gauss maps x -> 1/(k + x) on [0, 1] for the given digits.
inline gdms gauss_system(const std::vector<int>& digits) {
    gdms sys;
    sys.dim = 1;
    sys.vertices.push_back({"I", box{point{0.0, 0.0}, point{1.0, 0.0}}});
    std::vector<std::string> names;
    for (int k : digits) {
        names.push_back(std::to_string(k));
        sys.maps.emplace_back(moebius{{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {static_cast<double>(k), 0.0}});
    }
    sys.alph = alphabet::single_vertex(names);
    sys.incidence = incidence_matrix::ones(digits.size());
    validate_or_throw(sys);
    return sys;
}

/// Random OSC similarity IFS on [0, 1]: `count` ratios in [lo, hi] laid out
/// left to right with random gaps.
inline gdms random_osc_interval_system(std::uint64_t seed, std::size_t count, double lo, double hi) {
    auto rng = indexed_rng(seed, 0);
    std::vector<double> ratios;
    double used = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        ratios.push_back(lo + (hi - lo) * uniform01(rng));
        used += ratios.back();
    }
    if (used > 1.0) {
        for (double& r : ratios) {
            r *= 0.98 / used;
        }
        used = 0.98;
    }
    std::vector<double> gaps(count + 1);
    double gap_total = 0.0;
    for (double& g : gaps) {
        g = uniform01(rng) + 0.05;
        gap_total += g;
    }
    std::vector<double> shifts;
    double x = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        x += gaps[k] / gap_total * (1.0 - used);
        shifts.push_back(x);
        x += ratios[k];
    }
    return interval_system(ratios, shifts);
}

}  // namespace cifs::testing
