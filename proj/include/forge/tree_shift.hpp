#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/group.hpp"

namespace forge {

struct TreeSymbol {
    std::array<int, 3> s{};  // generator indices
    int p = 0;
    int c = 0;

    bool operator==(const TreeSymbol& o) const { return s == o.s && p == o.p && c == o.c; }
};

struct TreePatch {
    std::map<Element, TreeSymbol> cells;

    const TreeSymbol* find(const Element& g) const {
        auto it = cells.find(g);
        return it == cells.end() ? nullptr : &it->second;
    }
};

/// Parent map on F2 rerouted along the ray a^n, n >= 0: exactly 3-to-1.
class ParadoxicalMap {
public:
    ParadoxicalMap() : group_(Group::free(2)) {}

    const Group& group() const { return group_; }

    // K = {a, a-, b, b-}
    static constexpr std::array<int, 4> displacements{1, 2, 3, 4};

    static bool on_ray(const Element& g) {
        for (auto x : g)
            if (x != 1) return false;
        return true;
    }

    Element phi(const Element& g) const {
        if (on_ray(g)) return group_.mul(g, group_.generator(1));
        Element parent = g;
        parent.pop_back();
        return parent;
    }

    /// Preimages of g in shortlex order.
    std::vector<Element> preimages(const Element& g) const {
        std::vector<Element> out;
        for (int k : displacements) {
            auto cand = group_.mul(g, group_.generator(k));
            if (phi(cand) == g) out.push_back(std::move(cand));
        }
        group_.sort_shortlex(out);
        return out;
    }

private:
    Group group_;
};

inline TreePatch tau_build(const ParadoxicalMap& m, std::int64_t radius) {
    const auto& G = m.group();
    TreePatch out;
    for (const auto& g : G.ball(radius)) {
        auto pre = m.preimages(g);
        if (pre.size() != 3) throw DomainError("phi is not 3-to-1 at " + G.format_element(g));
        TreeSymbol t;
        auto gi = G.inv(g);
        for (int i = 0; i < 3; ++i) t.s[static_cast<std::size_t>(i)] = G.generator_of(G.mul(gi, pre[static_cast<std::size_t>(i)]));
        auto up = m.phi(g);
        t.p = G.generator_of(G.mul(gi, up));
        auto siblings = m.preimages(up);
        t.c = -1;
        for (int i = 0; i < 3; ++i)
            if (siblings[static_cast<std::size_t>(i)] == g) t.c = i;
        if (t.c < 0) throw DomainError("element missing from its parent's preimages");
        out.cells.emplace(g, t);
    }
    return out;
}

struct TreeViolation {
    std::string rule;  // "tree.1" or "tree.2"
    Element at;
    std::string detail;
};

/// Both defining constraints of the binary tree shift, open-boundary.
inline std::vector<TreeViolation> check_tree_constraints(const Group& G, const TreePatch& patch) {
    std::vector<Element> order;
    for (const auto& kv : patch.cells) order.push_back(kv.first);
    G.sort_shortlex(order);
    std::vector<TreeViolation> out;
    for (const auto& g : order) {
        const auto& t = patch.cells.at(g);
        if (t.c < 0 || t.c > 2) {
            out.push_back({"tree.symbol", g, "color out of range"});
            continue;
        }
        int k = t.p;
        if (const auto* up = patch.find(G.mul(g, G.generator(k)))) {
            if (up->s[static_cast<std::size_t>(t.c)] != Group::inverse_generator(k))
                out.push_back({"tree.1", g, "s_" + std::to_string(t.c) + " at g*p is not p^-1"});
        }
        for (int i = 0; i < 3; ++i) {
            int si = t.s[static_cast<std::size_t>(i)];
            const auto* child = patch.find(G.mul(g, G.generator(si)));
            if (!child) continue;
            if (child->p != Group::inverse_generator(si) || child->c != i)
                out.push_back({"tree.2", g, "child along s_" + std::to_string(i) + " does not point back"});
        }
    }
    return out;
}

inline int root_of(const TreeSymbol& t) { return t.s[static_cast<std::size_t>((t.c + 2) % 3)]; }
inline int son_of(const TreeSymbol& t, int b) { return t.s[static_cast<std::size_t>((t.c + b) % 3)]; }

inline const TreeSymbol& tree_cell(const Group& G, const TreePatch& patch, const Element& g) {
    const auto* t = patch.find(g);
    if (!t) throw BoundaryError("tree walk left the patch at " + G.format_element(g));
    return *t;
}

/// The tree map: g -> root, then one son step per bit of w.
inline Element gamma(const Group& G, const TreePatch& patch, const std::vector<int>& w, const Element& g) {
    Element h = G.mul(g, G.generator(root_of(tree_cell(G, patch, g))));
    for (int b : w) h = G.mul(h, G.generator(son_of(tree_cell(G, patch, h), b)));
    return h;
}

/// (g^-1 tau)(x) = tau(g x)
inline TreePatch shift_tree_patch(const Group& G, const TreePatch& patch, const Element& g) {
    TreePatch out;
    auto gi = G.inv(g);
    for (const auto& [x, t] : patch.cells) out.cells.emplace(G.mul(gi, x), t);
    return out;
}

inline std::vector<int> parse_bits(const std::string& s) {
    std::vector<int> w;
    for (char ch : s) {
        if (ch == '0' || ch == '1')
            w.push_back(ch - '0');
        else
            throw SpecError("bit word may contain only 0 and 1");
    }
    return w;
}

inline std::string format_bits(const std::vector<int>& w) {
    std::string s;
    for (int b : w) s += static_cast<char>('0' + b);
    return s;
}

}  // namespace forge
