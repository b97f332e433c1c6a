#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "forge/errors.hpp"
#include "forge/group.hpp"
#include "forge/subshift.hpp"

namespace forge {

constexpr int kDollar = -1;

struct ToeplitzWord {
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    std::vector<int> cells;  // cells[j - lo]

    std::size_t size() const { return cells.size(); }
    int at(std::int64_t j) const { return cells.at(static_cast<std::size_t>(j - lo)); }
    bool operator==(const ToeplitzWord& o) const { return lo == o.lo && hi == o.hi && cells == o.cells; }
};

inline std::int64_t pos_mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

/// Level n with j = 3^n mod 3^{n+1}, or -1 when position j carries $.
inline int toeplitz_level(std::int64_t j) {
    if (j == 0) return -1;
    int n = 0;
    while (pos_mod(j, 3) == 0) {
        j /= 3;
        ++n;
    }
    return pos_mod(j, 3) == 1 ? n : -1;
}

inline ToeplitzWord toeplitz_encode(const std::vector<int>& y, std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw SpecError("empty range");
    ToeplitzWord out{lo, hi, {}};
    out.cells.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t j = lo; j <= hi; ++j) {
        int n = toeplitz_level(j);
        if (n < 0) {
            out.cells.push_back(kDollar);
        } else {
            if (static_cast<std::size_t>(n) >= y.size())
                throw BoundaryError("prefix too short: position " + std::to_string(j) + " needs y_" + std::to_string(n));
            out.cells.push_back(y[static_cast<std::size_t>(n)]);
        }
    }
    return out;
}

/// Identify the y_0 track and drop it; returns y_0 and the window of the shifted sequence.
inline std::pair<int, ToeplitzWord> toeplitz_decode_step(const ToeplitzWord& w) {
    if (w.size() < 7) throw FormatError("window needs at least 7 cells to identify the first track");
    std::vector<int> holds;
    int y0 = kDollar;
    for (int r = 0; r < 3; ++r) {
        std::optional<int> value;
        bool constant = true, next_blank = true;
        for (std::int64_t j = w.lo; j <= w.hi; ++j) {
            int v = w.at(j);
            if (pos_mod(j, 3) == r) {
                if (v == kDollar || (value && *value != v)) constant = false;
                value = v;
            } else if (pos_mod(j, 3) == (r + 1) % 3 && v != kDollar) {
                next_blank = false;
            }
        }
        if (constant && next_blank && value) {
            holds.push_back(r);
            if (r == 1) y0 = *value;
        }
    }
    if (holds.size() != 1 || holds[0] != 1) throw FormatError("window is not a Toeplitz word anchored at position 1");
    std::int64_t nlo = w.lo >= 0 ? (w.lo + 2) / 3 : -((-w.lo) / 3);
    std::int64_t nhi = w.hi >= 0 ? w.hi / 3 : -((-w.hi + 2) / 3);
    ToeplitzWord out{nlo, nhi, {}};
    for (std::int64_t j = nlo; j <= nhi; ++j) out.cells.push_back(w.at(3 * j));
    return {y0, out};
}

/// Symbolic view of a window: "$" or "y<n>".
inline std::vector<std::string> toeplitz_tokens(std::int64_t lo, std::int64_t hi) {
    std::vector<std::string> out;
    for (std::int64_t j = lo; j <= hi; ++j) {
        int n = toeplitz_level(j);
        out.push_back(n < 0 ? std::string("$") : "y" + std::to_string(n));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Set representations of coordinate-permuting actions on A^N.

/// (s x)(e_k) = x(e_{source[s][k]}); -1 marks a coordinate outside the prefix.
struct ActionTable {
    std::vector<std::vector<std::ptrdiff_t>> source;
    std::size_t identity_slot = 0;
};

/// y[k][i] is the symbol of pi_{s_i} y at coordinate k.
using SetRepElement = std::vector<std::vector<int>>;

struct SetRepViolation {
    std::size_t slot = 0;
    std::size_t coordinate = 0;
    bool operator==(const SetRepViolation& o) const { return slot == o.slot && coordinate == o.coordinate; }
};

/// The shift action of N on A^N read through the first K elements of the shortlex enumeration.
inline ActionTable shift_action_table(const Group& N, const std::vector<int>& S, std::size_t K) {
    std::int64_t r = 0;
    std::vector<Element> en = N.ball(0);
    while (en.size() < K) en = N.ball(++r);
    en.resize(K);
    ElementIndex idx(en);
    ActionTable t;
    bool found = false;
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (S[i] == 0) {
            t.identity_slot = i;
            found = true;
        }
        std::vector<std::ptrdiff_t> row;
        auto si = N.inv(N.generator(S[i]));
        for (const auto& e : en) row.push_back(idx.find(N.mul(si, e)));
        t.source.push_back(std::move(row));
    }
    if (!found) throw SpecError("generating set must contain the identity");
    return t;
}

inline SetRepElement setrep_build(const Group& N, const std::vector<int>& S, const ConfigPatch& x, std::size_t K) {
    std::int64_t r = 0;
    std::vector<Element> en = N.ball(0);
    while (en.size() < K) en = N.ball(++r);
    en.resize(K);
    SetRepElement y(K, std::vector<int>(S.size()));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < S.size(); ++i) {
            auto g = N.mul(N.inv(N.generator(S[i])), en[k]);
            auto v = x.at(g);
            if (!v) throw BoundaryError("configuration undefined at " + N.format_element(g));
            y[k][i] = *v;
        }
    return y;
}

/// pi_s y = s (pi_1 y) at every coordinate the table can resolve.
inline std::vector<SetRepViolation> setrep_check(const SetRepElement& y, const ActionTable& t) {
    std::vector<SetRepViolation> out;
    for (std::size_t i = 0; i < t.source.size(); ++i)
        for (std::size_t k = 0; k < y.size() && k < t.source[i].size(); ++k) {
            auto src = t.source[i][k];
            if (src < 0 || static_cast<std::size_t>(src) >= y.size()) continue;
            if (y[k][i] != y[static_cast<std::size_t>(src)][t.identity_slot]) out.push_back({i, k});
        }
    return out;
}

// ---------------------------------------------------------------------------
// Coupling rules over H x N.

struct WCell {
    std::pair<int, int> d{0, 0};
    std::optional<std::vector<int>> y;  // nullopt is $
};

struct WPatch {
    Group H;
    Group N;
    std::vector<int> S;  // generator indices of N, identity included
    std::map<std::pair<Element, Element>, WCell> cells;
};

struct WViolation {
    std::string rule;  // "W.direction" or "W.coupling"
    Element h, n;
    int s = 0;
    bool operator<(const WViolation& o) const {
        return std::tie(h, n, s, rule) < std::tie(o.h, o.n, o.s, o.rule);
    }
};

inline std::vector<WViolation> w_rules_check(const WPatch& p) {
    std::size_t one = p.S.size();
    for (std::size_t i = 0; i < p.S.size(); ++i)
        if (p.S[i] == 0) one = i;
    if (one == p.S.size()) throw SpecError("generating set must contain the identity");
    std::vector<WViolation> out;
    for (const auto& [key, c] : p.cells) {
        const auto& [h, n] = key;
        for (std::size_t i = 0; i < p.S.size(); ++i) {
            int s = p.S[i];
            auto ns = p.N.mul(n, p.N.generator(s));
            if (auto it = p.cells.find({h, ns}); it != p.cells.end() && it->second.d != c.d)
                out.push_back({"W.direction", h, n, s});
            auto nsi = p.N.mul(n, p.N.generator(Group::inverse_generator(s)));
            auto it = p.cells.find({h, nsi});
            if (it == p.cells.end()) continue;
            const auto& other = it->second.y;
            bool ok = (!c.y && !other) ||
                      (c.y && other && c.y->size() == p.S.size() && other->size() == p.S.size() &&
                       (*c.y)[i] == (*other)[one]);
            if (!ok) out.push_back({"W.coupling", h, n, s});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// y(h,n) = Toeplitz coding at position h of k -> (s -> z(n s^-1 e_k)); H must be Z.
inline WPatch w_build(const Group& N, const std::vector<int>& S, const ConfigPatch& z, std::int64_t h_radius,
                      std::int64_t n_radius) {
    WPatch p{Group::lattice(1), N, S, {}};
    int levels = 0;
    while (true) {
        std::int64_t pw = 1;
        for (int i = 0; i < levels; ++i) pw *= 3;
        if (pw > h_radius) break;
        ++levels;
    }
    auto K = static_cast<std::size_t>(std::max(levels, 1));
    std::int64_t r = 0;
    std::vector<Element> en = N.ball(0);
    while (en.size() < K) en = N.ball(++r);
    en.resize(K);
    for (const auto& n : N.ball(n_radius)) {
        std::vector<std::vector<int>> Y(K, std::vector<int>(S.size()));
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < S.size(); ++i) {
                auto g = N.mul(N.mul(n, N.generator(Group::inverse_generator(S[i]))), en[k]);
                auto v = z.at(g);
                if (!v) throw BoundaryError("configuration undefined at " + N.format_element(g));
                Y[k][i] = *v;
            }
        for (std::int64_t j = -h_radius; j <= h_radius; ++j) {
            WCell c;
            c.d = {2, 1};
            int lvl = toeplitz_level(j);
            if (lvl >= 0) c.y = Y[static_cast<std::size_t>(lvl)];
            p.cells[{Element{j}, n}] = std::move(c);
        }
    }
    return p;
}

}  // namespace forge
