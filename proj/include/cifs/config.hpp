#pragma once

// JSON system files: parse with field diagnostics, emit at full precision,
// and hash the canonical form.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cifs/gdms.hpp"

namespace cifs {

using json = nlohmann::ordered_json;

inline constexpr int config_format_version = 1;

class config_error : public std::runtime_error {
public:
    explicit config_error(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string out;
        for (const auto& s : p) {
            out += (out.empty() ? "" : "\n") + s;
        }
        return out;
    }
    std::vector<std::string> problems_;
};

namespace detail {

class field_reader {
public:
    std::vector<std::string> problems;

    const json* member(const json& obj, const std::string& key, const std::string& path, bool required = true) {
        if (!obj.is_object()) {
            problems.push_back(path + ": expected an object");
            return nullptr;
        }
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) {
                problems.push_back(path + "/" + key + ": missing field");
            }
            return nullptr;
        }
        return &*it;
    }

    double number(const json& v, const std::string& path) {
        if (!v.is_number()) {
            problems.push_back(path + ": expected a number");
            return 0.0;
        }
        return v.get<double>();
    }

    /// [x, y], a bare number (y = 0), or {"re": x, "im": y}.
    point coords(const json& v, const std::string& path) {
        if (v.is_number()) {
            return {v.get<double>(), 0.0};
        }
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return {v[0].get<double>(), v[1].get<double>()};
        }
        if (v.is_array() && v.size() == 1 && v[0].is_number()) {
            return {v[0].get<double>(), 0.0};
        }
        problems.push_back(path + ": expected a number or a [x, y] pair");
        return {};
    }

    std::string text(const json& v, const std::string& path) {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_number_integer()) {
            return std::to_string(v.get<long long>());
        }
        problems.push_back(path + ": expected a string");
        return {};
    }
};

inline region parse_region(field_reader& rd, const json& v, const std::string& path) {
    if (const json* b = rd.member(v, "ball", path, false)) {
        point c{};
        double r = 0.0;
        if (const json* cj = rd.member(*b, "center", path + "/ball")) {
            c = rd.coords(*cj, path + "/ball/center");
        }
        if (const json* rj = rd.member(*b, "radius", path + "/ball")) {
            r = rd.number(*rj, path + "/ball/radius");
        }
        if (!(r > 0.0)) {
            rd.problems.push_back(path + "/ball/radius: must be positive");
        }
        return ball{c, r};
    }
    if (const json* b = rd.member(v, "box", path, false)) {
        point lo{}, hi{};
        if (const json* j = rd.member(*b, "min", path + "/box")) {
            lo = rd.coords(*j, path + "/box/min");
        }
        if (const json* j = rd.member(*b, "max", path + "/box")) {
            hi = rd.coords(*j, path + "/box/max");
        }
        if (hi.real() < lo.real() || hi.imag() < lo.imag()) {
            rd.problems.push_back(path + "/box: max corner below min corner");
        }
        return box{lo, hi};
    }
    rd.problems.push_back(path + ": seed region needs a 'ball' or a 'box'");
    return ball{};
}

inline conformal_map parse_map(field_reader& rd, const json& v, const std::string& path) {
    const json* tj = rd.member(v, "type", path);
    const std::string type = tj ? rd.text(*tj, path + "/type") : "";
    if (type == "similarity") {
        similarity s;
        if (const json* j = rd.member(v, "ratio", path)) {
            s.ratio = rd.number(*j, path + "/ratio");
        }
        if (const json* j = rd.member(v, "rotation_deg", path, false)) {
            const double deg = rd.number(*j, path + "/rotation_deg");
            // Quarter turns are kept exact so that 1-D maps stay on the real line.
            const double turns = deg / 90.0;
            if (turns == std::round(turns)) {
                const int q = ((static_cast<int>(std::round(turns)) % 4) + 4) % 4;
                s.rotation = q * std::numbers::pi / 2.0;
            } else {
                s.rotation = deg * std::numbers::pi / 180.0;
            }
        }
        if (const json* j = rd.member(v, "reflect", path, false)) {
            if (!j->is_boolean()) {
                rd.problems.push_back(path + "/reflect: expected a boolean");
            } else {
                s.reflect = j->get<bool>();
            }
        }
        if (const json* j = rd.member(v, "translation", path, false)) {
            s.translation = rd.coords(*j, path + "/translation");
        }
        return s;
    }
    if (type == "moebius") {
        moebius m;
        const char* keys[4] = {"a", "b", "c", "d"};
        point* slots[4] = {&m.a, &m.b, &m.c, &m.d};
        for (int k = 0; k < 4; ++k) {
            if (const json* j = rd.member(v, keys[k], path)) {
                *slots[k] = rd.coords(*j, path + "/" + keys[k]);
            }
        }
        return m;
    }
    if (type == "gauss") {
        double k = 0.0;
        if (const json* j = rd.member(v, "k", path)) {
            if (!j->is_number_integer() || j->get<long long>() < 1) {
                rd.problems.push_back(path + "/k: expected an integer >= 1");
            } else {
                k = static_cast<double>(j->get<long long>());
            }
        }
        return moebius{{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {k, 0.0}};
    }
    if (type == "analytic_branch") {
        point c{};
        point anchor{};
        std::vector<int> signs;
        if (const json* j = rd.member(v, "c", path)) {
            c = rd.coords(*j, path + "/c");
        }
        if (const json* j = rd.member(v, "anchor", path)) {
            anchor = rd.coords(*j, path + "/anchor");
        }
        if (const json* j = rd.member(v, "signs", path)) {
            if (!j->is_array()) {
                rd.problems.push_back(path + "/signs: expected an array of +1/-1");
            } else {
                for (const auto& s : *j) {
                    if (!s.is_number_integer() || (s.get<int>() != 1 && s.get<int>() != -1)) {
                        rd.problems.push_back(path + "/signs: entries must be +1 or -1");
                        break;
                    }
                    signs.push_back(s.get<int>());
                }
            }
        }
        if (const json* j = rd.member(v, "depth", path, false)) {
            if (!j->is_number_integer() || j->get<std::size_t>() != signs.size()) {
                rd.problems.push_back(path + "/depth: must equal the number of signs");
            }
        }
        if (signs.empty()) {
            rd.problems.push_back(path + "/signs: at least one step is required");
        }
        auto br = analytic_branch::make(c, signs, anchor);
        if (const json* j = rd.member(v, "fixed_point", path, false)) {
            br.fixed_point = rd.coords(*j, path + "/fixed_point");
        }
        return br;
    }
    rd.problems.push_back(path + "/type: unknown map type '" + type + "'");
    return similarity{};
}

inline json coords_json(point p, int dim) {
    if (dim == 1) {
        return p.real();
    }
    return json::array({p.real(), p.imag()});
}

inline json region_json(const region& r, int dim) {
    json out = json::object();
    if (const auto* b = std::get_if<ball>(&r)) {
        out["ball"] = {{"center", coords_json(b->center, dim)}, {"radius", b->radius}};
    } else {
        const auto& x = std::get<box>(r);
        out["box"] = {{"min", coords_json(x.lo, dim)}, {"max", coords_json(x.hi, dim)}};
    }
    return out;
}

inline json map_json(const conformal_map& m, int dim) {
    json out = json::object();
    if (const auto* s = std::get_if<similarity>(&m)) {
        out["type"] = "similarity";
        out["ratio"] = s->ratio;
        const double turns = s->rotation / (std::numbers::pi / 2.0);
        out["rotation_deg"] = turns == std::round(turns) ? 90.0 * std::round(turns) : s->rotation * 180.0 / std::numbers::pi;
        out["reflect"] = s->reflect;
        out["translation"] = coords_json(s->translation, dim);
    } else if (const auto* mb = std::get_if<moebius>(&m)) {
        const double k = mb->d.real();
        if (mb->a == point{} && mb->b == point{1.0, 0.0} && mb->c == point{1.0, 0.0} && mb->d.imag() == 0.0 &&
            k >= 1.0 && k == std::round(k) && k < 9.0e15) {
            out["type"] = "gauss";
            out["k"] = static_cast<long long>(k);
        } else {
            out["type"] = "moebius";
            out["a"] = coords_json(mb->a, 2);
            out["b"] = coords_json(mb->b, 2);
            out["c"] = coords_json(mb->c, 2);
            out["d"] = coords_json(mb->d, 2);
        }
    } else {
        const auto& br = std::get<analytic_branch>(m);
        out["type"] = "analytic_branch";
        out["c"] = coords_json(br.c, 2);
        out["depth"] = br.depth();
        out["signs"] = br.signs;
        out["anchor"] = coords_json(br.anchor, 2);
        if (!std::isnan(br.fixed_point.real())) {
            out["fixed_point"] = coords_json(br.fixed_point, 2);
        }
    }
    return out;
}

}  // namespace detail

/// Builds and validates a system from parsed JSON. Throws config_error with
/// one message per problem (field path first).
inline gdms system_from_json(const json& doc) {
    detail::field_reader rd;
    gdms sys;
    if (const json* v = rd.member(doc, "format_version", "")) {
        if (!v->is_number_integer() || v->get<int>() != config_format_version) {
            rd.problems.push_back("/format_version: unsupported version (expected " +
                                  std::to_string(config_format_version) + ")");
        }
    }
    if (const json* v = rd.member(doc, "dimension", "")) {
        sys.dim = v->is_number_integer() ? v->get<int>() : 0;
        if (sys.dim != 1 && sys.dim != 2) {
            rd.problems.push_back("/dimension: must be 1 or 2");
        }
    }
    std::map<std::string, std::size_t> vertex_index;
    if (const json* vs = rd.member(doc, "vertices", "")) {
        if (!vs->is_array() || vs->empty()) {
            rd.problems.push_back("/vertices: expected a nonempty array");
        } else {
            for (std::size_t k = 0; k < vs->size(); ++k) {
                const std::string path = "/vertices/" + std::to_string(k);
                vertex v;
                if (const json* n = rd.member((*vs)[k], "name", path)) {
                    v.name = rd.text(*n, path + "/name");
                }
                v.seed = detail::parse_region(rd, (*vs)[k], path);
                if (!vertex_index.emplace(v.name, k).second) {
                    rd.problems.push_back(path + "/name: duplicate vertex '" + v.name + "'");
                }
                sys.vertices.push_back(std::move(v));
            }
        }
    }
    sys.alph.vertex_count = sys.vertices.size();
    std::map<std::string, std::size_t> edge_index;
    if (const json* es = rd.member(doc, "edges", "")) {
        if (!es->is_array() || es->empty()) {
            rd.problems.push_back("/edges: expected a nonempty array");
        } else {
            for (std::size_t k = 0; k < es->size(); ++k) {
                const std::string path = "/edges/" + std::to_string(k);
                const json& e = (*es)[k];
                std::string name;
                if (const json* n = rd.member(e, "name", path)) {
                    name = rd.text(*n, path + "/name");
                }
                auto vertex_of = [&](const char* key) -> std::size_t {
                    const json* j = rd.member(e, key, path, sys.vertices.size() != 1);
                    if (!j) {
                        return 0;
                    }
                    const std::string vn = rd.text(*j, path + "/" + key);
                    auto it = vertex_index.find(vn);
                    if (it == vertex_index.end()) {
                        rd.problems.push_back(path + "/" + key + ": unknown vertex '" + vn + "'");
                        return 0;
                    }
                    return it->second;
                };
                sys.alph.initial.push_back(vertex_of("initial"));
                sys.alph.terminal.push_back(vertex_of("terminal"));
                sys.alph.edges.push_back(name);
                if (!edge_index.emplace(name, k).second) {
                    rd.problems.push_back(path + "/name: duplicate edge '" + name + "'");
                }
                if (const json* m = rd.member(e, "map", path)) {
                    sys.maps.push_back(detail::parse_map(rd, *m, path + "/map"));
                } else {
                    sys.maps.emplace_back(similarity{});
                }
            }
        }
    }
    const std::size_t n = sys.maps.size();
    auto edge_of = [&](const json& v, const std::string& path) -> std::optional<std::size_t> {
        const std::string name = rd.text(v, path);
        auto it = edge_index.find(name);
        if (it == edge_index.end()) {
            rd.problems.push_back(path + ": unknown edge '" + name + "'");
            return std::nullopt;
        }
        return it->second;
    };
    const json* inc = rd.member(doc, "incidence", "", false);
    if (!inc || (inc->is_string() && inc->get<std::string>() == "full")) {
        sys.incidence = incidence_matrix::maximal(sys.alph);
    } else if (inc->is_array()) {
        sys.incidence = incidence_matrix(n);
        for (std::size_t k = 0; k < inc->size(); ++k) {
            const std::string path = "/incidence/" + std::to_string(k);
            const json& pair = (*inc)[k];
            if (!pair.is_array() || pair.size() != 2) {
                rd.problems.push_back(path + ": expected an [e, f] pair");
                continue;
            }
            auto e = edge_of(pair[0], path + "/0");
            auto f = edge_of(pair[1], path + "/1");
            if (e && f) {
                sys.incidence.set(*e, *f, true);
            }
        }
    } else {
        rd.problems.push_back("/incidence: expected \"full\" or a list of [e, f] pairs");
        sys.incidence = incidence_matrix(n);
    }
    if (const json* fl = rd.member(doc, "filtration", "", false)) {
        if (!fl->is_array()) {
            rd.problems.push_back("/filtration: expected an array of edge lists");
        } else {
            for (std::size_t k = 0; k < fl->size(); ++k) {
                std::vector<std::size_t> level;
                const std::string path = "/filtration/" + std::to_string(k);
                if (!(*fl)[k].is_array()) {
                    rd.problems.push_back(path + ": expected an array of edge names");
                    continue;
                }
                for (std::size_t j = 0; j < (*fl)[k].size(); ++j) {
                    if (auto e = edge_of((*fl)[k][j], path + "/" + std::to_string(j))) {
                        level.push_back(*e);
                    }
                }
                sys.filtration.push_back(std::move(level));
            }
        }
    }
    if (const json* r = rd.member(doc, "alphabet_rule", "", false)) {
        sys.alphabet_rule = rd.text(*r, "/alphabet_rule");
    }
    if (!rd.problems.empty()) {
        throw config_error(std::move(rd.problems));
    }
    auto problems = validate(sys);
    if (!problems.empty()) {
        throw config_error(std::move(problems));
    }
    return sys;
}

inline gdms parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& ex) {
        // Translate the byte offset into a line number.
        std::size_t line = 1;
        for (std::size_t k = 0; k < std::min<std::size_t>(ex.byte, text.size()); ++k) {
            line += text[k] == '\n';
        }
        throw config_error({"line " + std::to_string(line) + ": " + ex.what()});
    }
    return system_from_json(doc);
}

inline gdms parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error({path + ": cannot open file"});
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

inline json system_to_json(const gdms& sys) {
    json doc = json::object();
    doc["format_version"] = config_format_version;
    doc["dimension"] = sys.dim;
    json vs = json::array();
    for (const auto& v : sys.vertices) {
        json item = {{"name", v.name}};
        item.update(detail::region_json(v.seed, sys.dim));
        vs.push_back(item);
    }
    doc["vertices"] = vs;
    json es = json::array();
    for (std::size_t e = 0; e < sys.edge_count(); ++e) {
        es.push_back({{"name", sys.alph.edges[e]},
                      {"initial", sys.vertices[sys.alph.initial[e]].name},
                      {"terminal", sys.vertices[sys.alph.terminal[e]].name},
                      {"map", detail::map_json(sys.maps[e], sys.dim)}});
    }
    doc["edges"] = es;
    if (sys.incidence == incidence_matrix::maximal(sys.alph)) {
        doc["incidence"] = "full";
    } else {
        json pairs = json::array();
        for (std::size_t e = 0; e < sys.edge_count(); ++e) {
            for (std::size_t f = 0; f < sys.edge_count(); ++f) {
                if (sys.incidence(e, f)) {
                    pairs.push_back(json::array({sys.alph.edges[e], sys.alph.edges[f]}));
                }
            }
        }
        doc["incidence"] = pairs;
    }
    if (!sys.filtration.empty()) {
        json fl = json::array();
        for (const auto& level : sys.filtration) {
            json names = json::array();
            for (auto e : level) {
                names.push_back(sys.alph.edges[e]);
            }
            fl.push_back(names);
        }
        doc["filtration"] = fl;
    }
    if (!sys.alphabet_rule.empty()) {
        doc["alphabet_rule"] = sys.alphabet_rule;
    }
    return doc;
}

inline std::string emit_config(const gdms& sys) { return system_to_json(sys).dump(2) + "\n"; }

inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// FNV-1a over the canonical (compact) JSON form.
inline std::uint64_t config_hash(const gdms& sys) { return fnv1a(system_to_json(sys).dump()); }

/// Field-by-field equality (maps, regions, alphabet, incidence, filtration).
inline bool same_system(const gdms& a, const gdms& b) {
    if (a.dim != b.dim || a.vertices.size() != b.vertices.size() || a.maps != b.maps ||
        a.alph.edges != b.alph.edges || a.alph.initial != b.alph.initial || a.alph.terminal != b.alph.terminal ||
        a.alph.vertex_count != b.alph.vertex_count || !(a.incidence == b.incidence) || a.filtration != b.filtration ||
        a.alphabet_rule != b.alphabet_rule) {
        return false;
    }
    for (std::size_t k = 0; k < a.vertices.size(); ++k) {
        if (a.vertices[k].name != b.vertices[k].name || a.vertices[k].seed != b.vertices[k].seed) {
            return false;
        }
    }
    return true;
}

}  // namespace cifs
