#include <gtest/gtest.h>

#include "cifs/numeric.hpp"
#include "cifs/symbolic.hpp"

using namespace cifs;

namespace {

const incidence_matrix swap_matrix = incidence_matrix::from_rows({{0, 1}, {1, 0}});

incidence_matrix random_matrix(std::uint64_t seed, std::size_t n, double density) {
    auto rng = indexed_rng(seed, n);
    incidence_matrix a(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a.set(i, j, uniform01(rng) < density);
        }
    }
    return a;
}

}  // namespace

TEST(AdmissibleWords, FullMatrixGivesAllWords) {
    const auto alph = alphabet::single_vertex(2);
    EXPECT_EQ(admissible_words(incidence_matrix::ones(2), alph, 3).size(), 8u);
}

TEST(AdmissibleWords, SwapMatrixAlternates) {
    const auto words = admissible_words(swap_matrix, alphabet::single_vertex(2), 3);
    ASSERT_EQ(words.size(), 2u);
    EXPECT_EQ(words[0], (word{0, 1, 0}));
    EXPECT_EQ(words[1], (word{1, 0, 1}));
}

TEST(AdmissibleWords, LengthZeroIsEmptyWord) {
    const auto words = admissible_words(incidence_matrix::ones(3), alphabet::single_vertex(3), 0);
    ASSERT_EQ(words.size(), 1u);
    EXPECT_TRUE(words[0].empty());
}

TEST(AdmissibleWords, CapIsEnforced) {
    EXPECT_THROW(admissible_words(incidence_matrix::ones(10), alphabet::single_vertex(10), 8, 1e6),
                 enumeration_too_large);
}

TEST(Admissibility, ForbiddenPairIsLocated) {
    EXPECT_FALSE(is_admissible(swap_matrix, {0, 1, 1}));
    EXPECT_EQ(first_forbidden_pair(swap_matrix, {0, 1, 1}), std::optional<std::size_t>(1));
    EXPECT_THROW(require_admissible(swap_matrix, {0, 0}), inadmissible_word);
    EXPECT_THROW(require_admissible(swap_matrix, {0, 5}), inadmissible_word);
}

TEST(Irreducibility, FullMatrixNeedsNoConnectors) {
    const auto r = is_finitely_irreducible(incidence_matrix::ones(2), alphabet::single_vertex(2));
    EXPECT_TRUE(r.irreducible);
    const auto omega = r.omega();
    ASSERT_EQ(omega.size(), 1u);
    EXPECT_TRUE(omega[0].empty());
}

TEST(Irreducibility, IdentityMatrixIsReducible) {
    EXPECT_FALSE(is_finitely_irreducible(incidence_matrix::from_rows({{1, 0}, {0, 1}}), alphabet::single_vertex(2))
                     .irreducible);
}

TEST(Irreducibility, SwapMatrixUsesSingleLetters) {
    const auto r = is_finitely_irreducible(swap_matrix, alphabet::single_vertex(2));
    ASSERT_TRUE(r.irreducible);
    bool single = false;
    for (const auto& w : r.omega()) {
        EXPECT_LE(w.size(), 2u);
        single = single || w.size() == 1;
    }
    EXPECT_TRUE(single);
}

TEST(Primitivity, Examples) {
    const auto alph = alphabet::single_vertex(2);
    auto full = is_finitely_primitive(incidence_matrix::ones(2), alph);
    EXPECT_TRUE(full.primitive);
    EXPECT_EQ(full.power, 1u);
    EXPECT_FALSE(is_finitely_primitive(swap_matrix, alph).primitive);
    auto golden = is_finitely_primitive(incidence_matrix::from_rows({{1, 1}, {1, 0}}), alph);
    EXPECT_TRUE(golden.primitive);
    EXPECT_EQ(golden.power, 2u);
}

TEST(SymbolicProperties, EnumeratedWordsAreAdmissible) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const std::size_t n = 2 + seed % 3;
        const auto a = random_matrix(seed, n, 0.6);
        for (const auto& w : admissible_words(a, alphabet::single_vertex(n), 4)) {
            EXPECT_TRUE(is_admissible(a, w));
        }
    }
}

TEST(SymbolicProperties, ConnectorsProduceAdmissibleConcatenations) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const std::size_t n = 2 + seed % 5;
        const auto a = random_matrix(seed, n, 0.35);
        const auto r = is_finitely_irreducible(a, alphabet::single_vertex(n));
        if (!r.irreducible) {
            continue;
        }
        for (const auto& c : r.witness) {
            word w{c.from};
            w.insert(w.end(), c.middle.begin(), c.middle.end());
            w.push_back(c.to);
            EXPECT_TRUE(is_admissible(a, w));
            EXPECT_LE(c.middle.size(), n);
        }
    }
}

TEST(SymbolicProperties, PrimitiveImpliesIrreducible) {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const std::size_t n = 1 + seed % 6;
        const auto a = random_matrix(seed, n, 0.4);
        const auto alph = alphabet::single_vertex(n);
        if (is_finitely_primitive(a, alph).primitive) {
            EXPECT_TRUE(is_finitely_irreducible(a, alph).irreducible) << "seed " << seed;
        }
    }
}

TEST(SymbolicProperties, CountMatchesEnumeration) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const std::size_t n = 1 + seed % 4;
        const auto a = random_matrix(seed, n, 0.5);
        for (std::size_t len = 1; len <= 6; ++len) {
            EXPECT_EQ(count_admissible_words(a, len), admissible_words(a, alphabet::single_vertex(n), len).size());
        }
    }
}

TEST(SymbolStream, PeriodicAndConstant) {
    auto s = symbol_stream::periodic({1, 0});
    EXPECT_EQ(s.prefix(5), (word{1, 0, 1, 0, 1}));
    auto c = symbol_stream::constant(3);
    EXPECT_EQ(c.letter(100), 3u);
    EXPECT_THROW(symbol_stream::periodic({}), std::invalid_argument);
}
