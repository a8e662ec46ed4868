#pragma once

// Alphabets, incidence matrices and admissible words of a graph directed
// Markov system, plus the finite irreducibility / primitivity checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace cifs {

using word = std::vector<std::size_t>;

/// Edges of a directed multigraph. Edge k runs from vertex initial[k] to
/// vertex terminal[k]; its map sends X_terminal into X_initial.
struct alphabet {
    std::vector<std::string> edges;
    std::vector<std::size_t> initial;
    std::vector<std::size_t> terminal;
    std::size_t vertex_count = 1;

    std::size_t size() const { return edges.size(); }

    /// Single-vertex alphabet with the given edge names.
    static alphabet single_vertex(std::vector<std::string> names) {
        alphabet a;
        a.initial.assign(names.size(), 0);
        a.terminal.assign(names.size(), 0);
        a.edges = std::move(names);
        return a;
    }

    static alphabet single_vertex(std::size_t count) {
        std::vector<std::string> names;
        for (std::size_t k = 0; k < count; ++k) {
            names.push_back(std::to_string(k));
        }
        return single_vertex(std::move(names));
    }
};

class enumeration_too_large : public std::length_error {
public:
    using std::length_error::length_error;
};

class inadmissible_word : public std::invalid_argument {
public:
    inadmissible_word(std::size_t pair_index, const std::string& what)
        : std::invalid_argument(what), pair_index_(pair_index) {}
    /// j such that letters j and j+1 are not allowed to follow each other.
    std::size_t pair_index() const { return pair_index_; }

private:
    std::size_t pair_index_;
};

/// Boolean matrix A over edge pairs; A(e, f) == true allows "ef" in a word.
class incidence_matrix {
public:
    incidence_matrix() = default;
    explicit incidence_matrix(std::size_t n) : n_(n), a_(n * n, 0) {}

    static incidence_matrix ones(std::size_t n) {
        incidence_matrix m(n);
        std::fill(m.a_.begin(), m.a_.end(), std::uint8_t{1});
        return m;
    }

    /// Maximal matrix of the alphabet: ef allowed iff t(e) == i(f).
    static incidence_matrix maximal(const alphabet& alph) {
        incidence_matrix m(alph.size());
        for (std::size_t e = 0; e < alph.size(); ++e) {
            for (std::size_t f = 0; f < alph.size(); ++f) {
                m.set(e, f, alph.terminal[e] == alph.initial[f]);
            }
        }
        return m;
    }

    static incidence_matrix from_rows(const std::vector<std::vector<int>>& rows) {
        incidence_matrix m(rows.size());
        for (std::size_t e = 0; e < rows.size(); ++e) {
            if (rows[e].size() != rows.size()) {
                throw std::invalid_argument("incidence matrix must be square");
            }
            for (std::size_t f = 0; f < rows.size(); ++f) {
                m.set(e, f, rows[e][f] != 0);
            }
        }
        return m;
    }

    std::size_t size() const { return n_; }
    bool operator()(std::size_t e, std::size_t f) const { return a_[e * n_ + f] != 0; }
    void set(std::size_t e, std::size_t f, bool v) { a_[e * n_ + f] = v ? 1 : 0; }

    bool all_ones() const {
        for (auto v : a_) {
            if (!v) {
                return false;
            }
        }
        return true;
    }

    /// Boolean product.
    incidence_matrix operator*(const incidence_matrix& o) const {
        incidence_matrix r(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t k = 0; k < n_; ++k) {
                if (!(*this)(i, k)) {
                    continue;
                }
                for (std::size_t j = 0; j < n_; ++j) {
                    if (o(k, j)) {
                        r.a_[i * n_ + j] = 1;
                    }
                }
            }
        }
        return r;
    }

    /// Restriction to a subset of edges (rows/columns kept in the given order).
    incidence_matrix restricted(const std::vector<std::size_t>& keep) const {
        incidence_matrix r(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            for (std::size_t j = 0; j < keep.size(); ++j) {
                r.set(i, j, (*this)(keep[i], keep[j]));
            }
        }
        return r;
    }

    friend bool operator==(const incidence_matrix&, const incidence_matrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> a_;
};

/// Index j of the first forbidden pair (w[j], w[j+1]), if any.
inline std::optional<std::size_t> first_forbidden_pair(const incidence_matrix& a, const word& w) {
    for (std::size_t j = 0; j + 1 < w.size(); ++j) {
        if (!a(w[j], w[j + 1])) {
            return j;
        }
    }
    return std::nullopt;
}

inline bool is_admissible(const incidence_matrix& a, const word& w) {
    for (auto letter : w) {
        if (letter >= a.size()) {
            return false;
        }
    }
    return !first_forbidden_pair(a, w).has_value();
}

inline void require_admissible(const incidence_matrix& a, const word& w) {
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] >= a.size()) {
            throw inadmissible_word(j, "letter " + std::to_string(w[j]) + " is not in the alphabet");
        }
    }
    if (auto j = first_forbidden_pair(a, w)) {
        throw inadmissible_word(*j, "inadmissible word: pair at index " + std::to_string(*j) + " (" +
                                        std::to_string(w[*j]) + "," + std::to_string(w[*j + 1]) +
                                        ") is forbidden by the incidence matrix");
    }
}

inline constexpr double default_enumeration_cap = 4.0e6;

/// E_A^n in lexicographic order of letter indices. n == 0 yields the empty word.
inline std::vector<word> admissible_words(const incidence_matrix& a, const alphabet& alph, std::size_t n,
                                          double cap = default_enumeration_cap) {
    const auto m = static_cast<double>(alph.size());
    if (a.size() != alph.size()) {
        throw std::invalid_argument("incidence matrix and alphabet sizes differ");
    }
    if (n > 0 && std::pow(m, static_cast<double>(n)) > cap) {
        throw enumeration_too_large("enumeration too large: |E|^n = " + std::to_string(m) + "^" +
                                    std::to_string(n) + " exceeds the cap");
    }
    std::vector<word> out;
    if (n == 0) {
        out.emplace_back();
        return out;
    }
    word current;
    current.reserve(n);
    std::function<void()> extend = [&]() {
        if (current.size() == n) {
            out.push_back(current);
            return;
        }
        for (std::size_t f = 0; f < alph.size(); ++f) {
            if (current.empty() || a(current.back(), f)) {
                current.push_back(f);
                extend();
                current.pop_back();
            }
        }
    };
    extend();
    return out;
}

/// |E_A^n| as the entry sum of A^(n-1), computed with exact integer counts.
inline std::uint64_t count_admissible_words(const incidence_matrix& a, std::size_t n) {
    if (n == 0) {
        return 1;
    }
    std::vector<std::uint64_t> ending(a.size(), 1);
    for (std::size_t step = 1; step < n; ++step) {
        std::vector<std::uint64_t> next(a.size(), 0);
        for (std::size_t e = 0; e < a.size(); ++e) {
            for (std::size_t f = 0; f < a.size(); ++f) {
                if (a(e, f)) {
                    next[f] += ending[e];
                }
            }
        }
        ending.swap(next);
    }
    std::uint64_t total = 0;
    for (auto c : ending) {
        total += c;
    }
    return total;
}

struct connector {
    std::size_t from;
    std::size_t to;
    word middle;  // e + middle + f is admissible
};

struct irreducibility_result {
    bool irreducible = false;
    std::vector<connector> witness;  // one connector per ordered pair when irreducible
    /// Distinct connecting words (the finite set Omega).
    std::vector<word> omega() const {
        std::vector<word> out;
        for (const auto& c : witness) {
            if (std::find(out.begin(), out.end(), c.middle) == out.end()) {
                out.push_back(c.middle);
            }
        }
        std::sort(out.begin(), out.end(), [](const word& x, const word& y) {
            return x.size() < y.size() || (x.size() == y.size() && x < y);
        });
        return out;
    }
};

/// Finite irreducibility: every ordered pair (e, f) is joined by a shortest
/// connecting word found by breadth-first search on the arc graph e -> f.
inline irreducibility_result is_finitely_irreducible(const incidence_matrix& a, const alphabet& alph) {
    const std::size_t n = alph.size();
    irreducibility_result result;
    result.irreducible = n > 0;
    for (std::size_t e = 0; e < n; ++e) {
        // parent[f]: letter preceding f on a shortest path out of e, or
        // kDirect when e f is itself admissible.
        constexpr std::ptrdiff_t kUnseen = -1;
        constexpr std::ptrdiff_t kDirect = -2;
        std::vector<std::ptrdiff_t> parent(n, kUnseen);
        std::queue<std::size_t> q;
        for (std::size_t f = 0; f < n; ++f) {
            if (a(e, f)) {
                parent[f] = kDirect;
                q.push(f);
            }
        }
        while (!q.empty()) {
            const auto g = q.front();
            q.pop();
            for (std::size_t f = 0; f < n; ++f) {
                if (a(g, f) && parent[f] == kUnseen) {
                    parent[f] = static_cast<std::ptrdiff_t>(g);
                    q.push(f);
                }
            }
        }
        for (std::size_t f = 0; f < n; ++f) {
            if (parent[f] == kUnseen) {
                result.irreducible = false;
                result.witness.clear();
                return result;
            }
            word middle;
            for (auto p = parent[f]; p != kDirect; p = parent[static_cast<std::size_t>(p)]) {
                middle.push_back(static_cast<std::size_t>(p));
            }
            std::reverse(middle.begin(), middle.end());
            result.witness.push_back({e, f, middle});
        }
    }
    return result;
}

struct primitivity_result {
    bool primitive = false;
    std::size_t power = 0;  // smallest m with A^m all positive
};

/// Smallest m <= |E|^2 + 1 such that the boolean power A^m is all ones.
inline primitivity_result is_finitely_primitive(const incidence_matrix& a, const alphabet& alph) {
    const std::size_t n = alph.size();
    if (n == 0) {
        return {};
    }
    const std::size_t cap = n * n + 1;
    incidence_matrix power = a;
    for (std::size_t m = 1; m <= cap; ++m) {
        if (power.all_ones()) {
            return {true, m};
        }
        power = power * a;
    }
    return {};
}

/// Lazily generated infinite word with a cached prefix.
class symbol_stream {
public:
    using generator = std::function<std::size_t(std::size_t)>;

    explicit symbol_stream(generator g) : gen_(std::move(g)) {}

    static symbol_stream constant(std::size_t e) {
        return symbol_stream([e](std::size_t) { return e; });
    }

    static symbol_stream periodic(word period) {
        if (period.empty()) {
            throw std::invalid_argument("periodic stream needs a nonempty period");
        }
        return symbol_stream([p = std::move(period)](std::size_t i) { return p[i % p.size()]; });
    }

    std::size_t letter(std::size_t index) {
        while (cache_.size() <= index) {
            cache_.push_back(gen_(cache_.size()));
        }
        return cache_[index];
    }

    word prefix(std::size_t n) {
        if (n > 0) {
            letter(n - 1);
        }
        return word(cache_.begin(), cache_.begin() + static_cast<std::ptrdiff_t>(n));
    }

private:
    generator gen_;
    word cache_;
};

}  // namespace cifs
