#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cifs/config.hpp"
#include "support.hpp"

using namespace cifs;
using cifs::testing::bundled;
using cifs::testing::system_path;

namespace {

std::string messages_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const config_error& ex) {
        return ex.what();
    } catch (const validation_error& ex) {
        return ex.what();
    }
    return {};
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const char* two_maps = R"({
  "format_version": 1,
  "dimension": 1,
  "vertices": [{"name": "I", "box": {"min": 0, "max": 1}}],
  "edges": [
    {"name": "a", "initial": "I", "terminal": "I", "map": {"type": "similarity", "ratio": RATIO}},
    {"name": "b", "initial": "I", "terminal": "I", "map": {"type": "similarity", "ratio": 0.5, "translation": 0.5}}
  ],
  "incidence": "full"
})";

std::string with_ratio(const std::string& ratio) {
    std::string text = two_maps;
    text.replace(text.find("RATIO"), 5, ratio);
    return text;
}

}  // namespace

TEST(Config, BundledCantor) {
    const auto sys = bundled("cantor");
    EXPECT_EQ(sys.vertices.size(), 1u);
    EXPECT_EQ(sys.edge_count(), 2u);
    for (const auto& m : sys.maps) {
        EXPECT_NEAR(std::get<similarity>(m).ratio, 1.0 / 3.0, 1e-15);
    }
}

TEST(Config, AllBundledSystemsLoad) {
    for (const char* name : {"cantor", "gauss", "sierpinski", "overlap", "segment"}) {
        EXPECT_NO_THROW(bundled(name)) << name;
    }
    EXPECT_EQ(bundled("gauss").filtration.size(), 6u);
}

TEST(Config, RejectsExpandingMap) {
    EXPECT_NO_THROW(parse_config_text(with_ratio("0.5")));
    const auto msg = lower(messages_of([] { parse_config_text(with_ratio("1.2")); }));
    EXPECT_NE(msg.find("not a contraction"), std::string::npos) << msg;
}

TEST(Config, RejectsIncidenceAcrossVertices) {
    const std::string text = R"({
      "format_version": 1,
      "dimension": 1,
      "vertices": [{"name": "U", "box": {"min": 0, "max": 1}}, {"name": "V", "box": {"min": 2, "max": 3}}],
      "edges": [
        {"name": "uv", "initial": "U", "terminal": "V", "map": {"type": "similarity", "ratio": 0.25}},
        {"name": "vu", "initial": "V", "terminal": "U", "map": {"type": "similarity", "ratio": 0.25, "translation": 2}}
      ],
      "incidence": [["uv", "uv"]]
    })";
    const auto msg = lower(messages_of([&] { parse_config_text(text); }));
    EXPECT_NE(msg.find("incidence"), std::string::npos) << msg;
}

TEST(Config, FieldDiagnostics) {
    const auto missing = messages_of([] {
        parse_config_text(R"({"format_version": 1, "dimension": 1, "vertices": [{"name": "I"}], "edges": []})");
    });
    EXPECT_NE(missing.find("/vertices/0"), std::string::npos) << missing;
    const auto version = messages_of([] {
        parse_config_text(R"({"format_version": 7, "dimension": 1, "vertices": [], "edges": []})");
    });
    EXPECT_NE(version.find("format_version"), std::string::npos) << version;
    const auto syntax = messages_of([] { parse_config_text("{\n  \"format_version\": 1,\n  oops\n}"); });
    EXPECT_NE(syntax.find("line 3"), std::string::npos) << syntax;
    EXPECT_THROW(parse_config(system_path("does_not_exist")), config_error);
}

TEST(Config, RoundTripBundled) {
    for (const char* name : {"cantor", "gauss", "sierpinski", "overlap", "segment"}) {
        const auto sys = bundled(name);
        const auto text = emit_config(sys);
        const auto back = parse_config_text(text);
        EXPECT_TRUE(same_system(sys, back)) << name;
        EXPECT_EQ(emit_config(back), text) << name;
        EXPECT_EQ(config_hash(back), config_hash(sys)) << name;
    }
}

TEST(Config, RoundTripRandomSystems) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto sys = cifs::testing::random_osc_interval_system(seed, 2 + seed % 4, 0.1, 0.45);
        EXPECT_TRUE(same_system(sys, parse_config_text(emit_config(sys)))) << seed;
    }
}

TEST(Config, RoundTripMoebiusAndBranch) {
    const std::string text = R"({
      "format_version": 1,
      "dimension": 2,
      "vertices": [{"name": "B", "ball": {"center": [1.05, 0], "radius": 0.25}}],
      "edges": [
        {"name": "m", "initial": "B", "terminal": "B",
         "map": {"type": "moebius", "a": [0.2, 0], "b": [0.84, 0], "c": [0, 0], "d": [1, 0]}},
        {"name": "g", "initial": "B", "terminal": "B",
         "map": {"type": "analytic_branch", "c": [-0.1, 0], "signs": [1, 1, 1], "anchor": [1.05, 0]}}
      ],
      "incidence": "full"
    })";
    const auto sys = parse_config_text(text);
    EXPECT_TRUE(same_system(sys, parse_config_text(emit_config(sys))));
}

TEST(Config, HashDistinguishesSystems) {
    EXPECT_NE(config_hash(bundled("cantor")), config_hash(bundled("overlap")));
    EXPECT_EQ(config_hash(bundled("cantor")), config_hash(bundled("cantor")));
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
