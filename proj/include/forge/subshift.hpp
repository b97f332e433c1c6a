#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forge/errors.hpp"
#include "forge/group.hpp"

namespace forge {

struct Alphabet {
    std::vector<std::string> symbols;

    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> s) : symbols(std::move(s)) {
        if (symbols.empty()) throw SpecError("alphabet must be nonempty");
        auto sorted = symbols;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw SpecError("alphabet symbols must be distinct");
    }
    int index(const std::string& name) const {
        for (std::size_t i = 0; i < symbols.size(); ++i)
            if (symbols[i] == name) return static_cast<int>(i);
        throw SpecError("symbol '" + name + "' not in alphabet");
    }
    std::size_t size() const { return symbols.size(); }
    const std::string& operator[](std::size_t i) const { return symbols[i]; }
};

/// Finite partial map from words to symbol indices.
struct PatternCoding {
    std::vector<std::pair<Word, int>> entries;

    bool operator==(const PatternCoding& o) const { return entries == o.entries; }
    bool operator<(const PatternCoding& o) const { return entries < o.entries; }
};

/// Finite partial configuration over a declared ball.
struct ConfigPatch {
    std::int64_t radius = 0;
    std::map<Element, int> cells;

    std::optional<int> at(const Element& e) const {
        auto it = cells.find(e);
        if (it == cells.end()) return std::nullopt;
        return it->second;
    }
};

enum class Match { matches, refuted, undetermined };

struct MatchResult {
    Match value = Match::undetermined;
    std::string diagnostic;
};

inline const char* to_string(Match m) {
    switch (m) {
        case Match::matches: return "matches";
        case Match::refuted: return "refuted";
        case Match::undetermined: return "undetermined";
    }
    return "?";
}

// Element/symbol pairs of a coding, or the first clash between two words
// naming the same element.
inline std::optional<std::string> coding_inconsistency(const Group& G, const PatternCoding& c) {
    std::map<Element, std::pair<int, std::size_t>> seen;
    for (std::size_t i = 0; i < c.entries.size(); ++i) {
        auto e = G.eval(c.entries[i].first);
        auto [it, fresh] = seen.emplace(e, std::make_pair(c.entries[i].second, i));
        if (!fresh && it->second.first != c.entries[i].second)
            return "entries " + std::to_string(it->second.second) + " and " + std::to_string(i) +
                   " name the same element with different symbols";
    }
    return std::nullopt;
}

inline MatchResult coding_matches(const Group& G, const ConfigPatch& patch, const PatternCoding& c,
                                  const Element& at) {
    if (auto bad = coding_inconsistency(G, c)) return {Match::refuted, "inconsistent coding: " + *bad};
    bool undetermined = false;
    for (const auto& [w, a] : c.entries) {
        auto v = patch.at(G.mul(at, G.eval(w)));
        if (!v) {
            undetermined = true;
            continue;
        }
        if (*v != a) return {Match::refuted, {}};
    }
    return {undetermined ? Match::undetermined : Match::matches, {}};
}

// Alphabet {*,0,1}: symbol indices 0,1,2.
inline Alphabet reflection_alphabet() { return Alphabet({"*", "0", "1"}); }

/// All codings {e->x, w->y?}: undeduplicated, one word per element.
inline std::vector<PatternCoding> reflection_codings_raw(const Group& G, std::int64_t max_word_len) {
    std::vector<PatternCoding> out;
    if (max_word_len <= 0) return out;
    for (const auto& e : G.ball(max_word_len)) {
        if (e == G.identity()) continue;
        Word w = G.normal_word(e);
        Word wi = G.normal_word(G.inv(e));
        for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y)
                if (x != y) out.push_back({{{Word{}, 0}, {w, x}, {wi, y}}});
    }
    return out;
}

/// Reflection codings deduplicated by (w, x, y) ~ (w^-1, y, x).
inline std::vector<PatternCoding> reflection_codings(const Group& G, std::int64_t max_word_len) {
    std::vector<PatternCoding> out;
    if (max_word_len <= 0) return out;
    auto ball = G.ball(max_word_len);
    ElementIndex idx(ball);
    for (std::size_t i = 0; i < ball.size(); ++i) {
        const auto& e = ball[i];
        if (e == G.identity()) continue;
        auto j = idx.find(G.inv(e));
        if (j >= 0 && static_cast<std::size_t>(j) < i) continue;
        Word w = G.normal_word(e);
        Word wi = G.normal_word(G.inv(e));
        for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y)
                if (x != y) out.push_back({{{Word{}, 0}, {w, x}, {wi, y}}});
    }
    return out;
}

struct BallCenters {
    std::vector<Word> u, v;
    std::vector<Element> a, b;
};

/// Greedy shortlex placement of centers u_n, v_n with pairwise disjoint
/// balls u_n B_n, v_n B_n avoiding the identity.
inline BallCenters disjoint_ball_centers(const Group& G, std::int64_t n_max,
                                         std::size_t budget = global_budget()) {
    BallCenters out;
    if (n_max < 0) return out;
    std::set<Element> used;
    std::int64_t search = 1;
    std::vector<Element> candidates = G.ball(search, budget);
    auto try_place = [&](std::int64_t n, const std::vector<Element>& Bn) -> Element {
        for (;;) {
            for (const auto& c : candidates) {
                bool ok = true;
                for (const auto& x : Bn) {
                    auto y = G.mul(c, x);
                    if (y == G.identity() || used.count(y)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    for (const auto& x : Bn) used.insert(G.mul(c, x));
                    return c;
                }
            }
            ++search;
            candidates = G.ball(search, budget);
            if (search > 64 + 4 * n) throw BudgetError("no free center found within search radius");
        }
    };
    for (std::int64_t n = 0; n <= n_max; ++n) {
        auto Bn = G.ball(n, budget);
        auto a = try_place(n, Bn);
        auto b = try_place(n, Bn);
        out.a.push_back(a);
        out.b.push_back(b);
        out.u.push_back(G.normal_word(a));
        out.v.push_back(G.normal_word(b));
    }
    return out;
}

/// Independent check of the center postcondition; returns a diagnostic on failure.
inline std::optional<std::string> verify_ball_centers(const Group& G, const BallCenters& c) {
    std::size_t n = c.u.size();
    if (c.v.size() != n) return std::string("sequence lengths differ");
    std::vector<std::set<Element>> U(n), V(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto a = G.eval(c.u[k]);
        auto b = G.eval(c.v[k]);
        for (const auto& x : G.ball(static_cast<std::int64_t>(k))) {
            U[k].insert(G.mul(a, x));
            V[k].insert(G.mul(b, x));
        }
        if (U[k].count(G.identity()) || V[k].count(G.identity()))
            return "identity inside ball " + std::to_string(k);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (const auto& x : U[i])
                if (V[j].count(x)) return "u_" + std::to_string(i) + " and v_" + std::to_string(j) + " overlap";
    return std::nullopt;
}

inline std::vector<PatternCoding> ball_mimic_codings(const Group& G, const BallCenters& c, std::int64_t n_max) {
    std::vector<PatternCoding> out;
    auto top = std::min<std::int64_t>(n_max, static_cast<std::int64_t>(c.u.size()) - 1);
    for (std::int64_t n = 0; n <= top; ++n) {
        auto un = G.eval(c.u[static_cast<std::size_t>(n)]);
        auto vn = G.eval(c.v[static_cast<std::size_t>(n)]);
        for (const auto& w : G.ball(n)) {
            Word left = G.normal_word(G.mul(un, w));
            Word right = G.normal_word(G.mul(vn, w));
            for (int x = 0; x < 3; ++x)
                for (int y = 0; y < 3; ++y)
                    if (x != y) out.push_back({{{Word{}, 0}, {left, x}, {right, y}}});
        }
    }
    return out;
}

/// Replace every word of a coding by its shortlex geodesic.
inline PatternCoding geodesic_coding(const Group& G, const PatternCoding& c) {
    PatternCoding out;
    for (const auto& [w, a] : c.entries) out.entries.emplace_back(G.geodesic(w), a);
    return out;
}

struct SubshiftSpec {
    enum class Source { explicit_list, reflection, ball_mimic };
    Alphabet alphabet;
    Source source = Source::explicit_list;
    std::vector<PatternCoding> codings;
    std::int64_t parameter = 0;  // max word length or n_max

    std::vector<PatternCoding> emit(const Group& G) const {
        switch (source) {
            case Source::explicit_list: return codings;
            case Source::reflection: return reflection_codings(G, parameter);
            case Source::ball_mimic: {
                auto c = disjoint_ball_centers(G, parameter);
                return ball_mimic_codings(G, c, parameter);
            }
        }
        return {};
    }
};

struct Violation {
    std::size_t coding = 0;
    Element at;
};

/// Every (coding, location) pair in the patch support where the coding matches.
inline std::vector<Violation> scan_patch(const Group& G, const ConfigPatch& patch,
                                         const std::vector<PatternCoding>& codings) {
    std::vector<Element> support;
    for (const auto& kv : patch.cells) support.push_back(kv.first);
    G.sort_shortlex(support);
    std::vector<bool> consistent(codings.size());
    for (std::size_t i = 0; i < codings.size(); ++i) consistent[i] = !coding_inconsistency(G, codings[i]);
    std::vector<Violation> out;
    for (const auto& g : support)
        for (std::size_t i = 0; i < codings.size(); ++i)
            if (consistent[i] && coding_matches(G, patch, codings[i], g).value == Match::matches)
                out.push_back({i, g});
    return out;
}

}  // namespace forge
