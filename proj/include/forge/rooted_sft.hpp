#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "forge/errors.hpp"
#include "forge/group.hpp"
#include "forge/subshift.hpp"
#include "forge/tiles.hpp"
#include "forge/turing.hpp"

namespace forge {

// Bit words {0,1}^{<=d} in heap order: idx(eps)=0, idx(wb)=2 idx(w)+1+b.
inline std::size_t word_count(int depth) { return (std::size_t{1} << (depth + 1)) - 1; }
inline std::size_t child_index(std::size_t w, int b) { return 2 * w + 1 + static_cast<std::size_t>(b); }
inline std::size_t parent_index(std::size_t w) { return (w - 1) / 2; }
inline int last_bit(std::size_t w) { return static_cast<int>((w - 1) % 2); }
inline int word_level(std::size_t w) {
    int n = 0;
    while (w > 0) {
        w = parent_index(w);
        ++n;
    }
    return n;
}
inline std::size_t word_to_index(const std::vector<int>& bits) {
    std::size_t i = 0;
    for (int b : bits) i = child_index(i, b);
    return i;
}
inline std::vector<int> index_to_word(std::size_t i) {
    std::vector<int> bits;
    while (i > 0) {
        bits.push_back(last_bit(i));
        i = parent_index(i);
    }
    std::reverse(bits.begin(), bits.end());
    return bits;
}

struct DirectionSym {
    int l = 0;
    int r = 0;
    bool operator==(const DirectionSym& o) const { return l == o.l && r == o.r; }
};

struct BranchSym {
    Mark mark = Mark::empty;
    int bit = 0;
    bool empty() const { return mark == Mark::empty; }
    bool is(Mark m, int b) const { return mark == m && bit == b; }
    bool operator==(const BranchSym& o) const { return mark == o.mark && (empty() || bit == o.bit); }
};

struct TentacleSym {
    bool empty = true;
    int bit = 0;
    int prev = 0;
    int next = 0;
    int symb = 0;
    int comm = 0;  // generator index for G_s, kDelete for D

    bool base() const { return !empty && prev == 0; }
    bool tip() const { return !empty && next == 0; }
    bool operator==(const TentacleSym& o) const {
        if (empty || o.empty) return empty == o.empty;
        return bit == o.bit && prev == o.prev && next == o.next && symb == o.symb && comm == o.comm;
    }
};

// Unset layers are std::nullopt; the placeholder symbol is a set, empty value.
struct LayerCell {
    std::optional<int> alpha;
    std::optional<DirectionSym> delta;
    std::optional<BranchSym> beta;
    std::optional<int> gamma;  // tile id, -1 for the placeholder
    std::optional<TentacleSym> tau;
};

class LayeredPatch {
public:
    LayeredPatch(Group H, std::int64_t radius, int depth)
        : group_(std::move(H)), radius_(radius), depth_(depth), index_(group_.ball(radius)) {
        if (depth < 0 || depth > 24) throw SpecError("depth must be between 0 and 24");
        cells_.resize(index_.size() * word_count(depth));
    }

    const Group& group() const { return group_; }
    std::int64_t radius() const { return radius_; }
    int depth() const { return depth_; }
    std::size_t words() const { return word_count(depth_); }
    std::size_t elements() const { return index_.size(); }
    const ElementIndex& index() const { return index_; }
    const Element& element(std::size_t i) const { return index_[i]; }

    LayerCell& cell(std::size_t e, std::size_t w) { return cells_[e * words() + w]; }
    const LayerCell& cell(std::size_t e, std::size_t w) const { return cells_[e * words() + w]; }

    const LayerCell* find(const Element& h, std::size_t w) const {
        if (w >= words()) return nullptr;
        auto i = index_.find(h);
        return i < 0 ? nullptr : &cell(static_cast<std::size_t>(i), w);
    }
    LayerCell* find(const Element& h, std::size_t w) {
        if (w >= words()) return nullptr;
        auto i = index_.find(h);
        return i < 0 ? nullptr : &cell(static_cast<std::size_t>(i), w);
    }
    std::ptrdiff_t element_index(const Element& h) const { return index_.find(h); }

    bool operator==(const LayeredPatch& o) const {
        if (!(group_ == o.group_) || radius_ != o.radius_ || depth_ != o.depth_) return false;
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            const auto& a = cells_[i];
            const auto& b = o.cells_[i];
            if (a.alpha != b.alpha || a.delta != b.delta || a.beta != b.beta || a.gamma != b.gamma || a.tau != b.tau)
                return false;
        }
        return true;
    }

private:
    Group group_;
    std::int64_t radius_;
    int depth_;
    ElementIndex index_;
    std::vector<LayerCell> cells_;
};

struct LayerViolation {
    std::string rule;
    std::size_t element = 0;  // index into the patch ball
    std::size_t word = 0;     // heap index
    std::string detail;

    auto key() const { return std::tie(element, word, rule, detail); }
    bool operator<(const LayerViolation& o) const { return key() < o.key(); }
    bool operator==(const LayerViolation& o) const { return key() == o.key(); }
};

inline void normalize(std::vector<LayerViolation>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

namespace detail {

inline std::optional<Element> right_of(const LayeredPatch& p, const Element& h) {
    const auto* c = p.find(h, 0);
    if (!c || !c->delta) return std::nullopt;
    return p.group().mul(h, p.group().generator(c->delta->r));
}
inline std::optional<Element> left_of(const LayeredPatch& p, const Element& h) {
    const auto* c = p.find(h, 0);
    if (!c || !c->delta) return std::nullopt;
    return p.group().mul(h, p.group().generator(c->delta->l));
}
inline const BranchSym* beta_at(const LayeredPatch& p, const std::optional<Element>& h, std::size_t w) {
    if (!h) return nullptr;
    const auto* c = p.find(*h, w);
    return c && c->beta ? &*c->beta : nullptr;
}
inline const TentacleSym* tau_at(const LayeredPatch& p, const Element& h, std::size_t w) {
    const auto* c = p.find(h, w);
    return c && c->tau ? &*c->tau : nullptr;
}

}  // namespace detail

// A: trivial extension along the tree.
inline void alphabet_check_at(const LayeredPatch& p, std::size_t e, std::size_t alphabet_size,
                              std::vector<LayerViolation>& out) {
    const auto& root = p.cell(e, 0);
    for (std::size_t w = 0; w < p.words(); ++w) {
        const auto& c = p.cell(e, w);
        if (!c.alpha) continue;
        if (*c.alpha < 0 || static_cast<std::size_t>(*c.alpha) >= alphabet_size)
            out.push_back({"A.symbol", e, w, "alphabet symbol out of range"});
        if (w && root.alpha && *root.alpha != *c.alpha)
            out.push_back({"A.trivial-extension", e, w, "alphabet symbol differs from the root cell"});
    }
}

inline void directions_check_at(const LayeredPatch& p, std::size_t e, std::vector<LayerViolation>& out) {
    const auto& G = p.group();
    const auto& h = p.element(e);
    const auto& root = p.cell(e, 0);
    for (std::size_t w = 1; w < p.words(); ++w) {
        const auto& c = p.cell(e, w);
        if (c.delta && root.delta && !(*c.delta == *root.delta))
            out.push_back({"D.trivial-extension", e, w, "direction symbol differs from the root cell"});
    }
    if (!root.delta) return;
    int s = root.delta->r;
    if (const auto* nb = p.find(G.mul(h, G.generator(s)), 0); nb && nb->delta && nb->delta->l != Group::inverse_generator(s))
        out.push_back({"D.right-coherence", e, 0, "l(d(hs)) is not the inverse of r(d(h))"});
    int u = root.delta->l;
    if (const auto* nb = p.find(G.mul(h, G.generator(u)), 0); nb && nb->delta && nb->delta->r != Group::inverse_generator(u))
        out.push_back({"D.left-coherence", e, 0, "r(d(hu)) is not the inverse of l(d(h))"});
}

inline void branching_check_at(const LayeredPatch& p, std::size_t e, std::vector<LayerViolation>& out) {
    using detail::beta_at;
    const auto& h = p.element(e);
    auto R = detail::right_of(p, h);
    auto L = detail::left_of(p, h);
    for (std::size_t w = 0; w < p.words(); ++w) {
        const auto& c = p.cell(e, w);
        if (!c.beta) continue;
        const auto& bs = *c.beta;
        if (w == 0 && bs.mark != Mark::seed) out.push_back({"B.seed-rule", e, w, "root cell is not a seed"});
        if (w > 0) {
            int b = last_bit(w);
            auto u = parent_index(w);
            if (!bs.empty()) {
                const auto* up = beta_at(p, h, u);
                const auto* lu = L ? beta_at(p, L, u) : nullptr;
                bool licensed = false, unknown = false;
                if (up) {
                    licensed = licensed || (!up->empty() && up->bit == b);
                } else {
                    unknown = true;
                }
                if (lu) {
                    licensed = licensed || lu->is(Mark::right, b) || lu->is(Mark::seed, b);
                } else {
                    unknown = true;
                }
                if (!licensed && !unknown)
                    out.push_back({"B.from-seeds", e, w, "nonempty symbol not grown from the level below"});
            }
        }
        if (bs.empty()) continue;
        int b = bs.bit;
        const auto* rn = beta_at(p, R, w);
        const auto* ln = beta_at(p, L, w);
        auto mid_or_right = [&](const BranchSym* x) { return x->is(Mark::mid, b) || x->is(Mark::right, b); };
        auto left_or_mid = [&](const BranchSym* x) { return x->is(Mark::left, b) || x->is(Mark::mid, b); };
        if (bs.mark == Mark::left && rn && !mid_or_right(rn))
            out.push_back({"B.horizontal", e, w, "right of a left border must continue the zone"});
        if (bs.mark == Mark::mid) {
            if (rn && !mid_or_right(rn)) out.push_back({"B.horizontal", e, w, "right of a zone cell must continue"});
            if (ln && !left_or_mid(ln)) out.push_back({"B.horizontal", e, w, "left of a zone cell must continue"});
        }
        if (bs.mark == Mark::right && ln && !left_or_mid(ln))
            out.push_back({"B.horizontal", e, w, "left of a right border must continue the zone"});

        if (static_cast<int>(word_level(w)) >= p.depth()) continue;
        auto wb = child_index(w, b);
        const auto* up = beta_at(p, h, wb);
        const auto* rup = beta_at(p, R, wb);
        if (bs.mark == Mark::seed) {
            if (up && up->mark != Mark::left) out.push_back({"B.seed-growth", e, w, "seed must grow a left border"});
            if (rup && rup->mark != Mark::right)
                out.push_back({"B.seed-growth", e, w, "seed must grow a right border to its right"});
            if (up && rup && up->mark == Mark::left && rup->mark == Mark::right && up->bit != rup->bit)
                out.push_back({"B.seed-growth", e, w, "grown borders disagree on the bit"});
        } else if (bs.mark == Mark::left) {
            if (up && up->mark != Mark::left) out.push_back({"B.branching", e, w, "left border must copy upward"});
        } else if (bs.mark == Mark::mid) {
            if (up && up->mark != Mark::mid) out.push_back({"B.branching", e, w, "zone cell must copy upward"});
        } else if (bs.mark == Mark::right) {
            if (up && up->mark != Mark::mid)
                out.push_back({"B.branching", e, w, "right border must become a zone cell"});
            if (rup && rup->mark != Mark::right)
                out.push_back({"B.branching", e, w, "right border must extend by one cell"});
            if (up && rup && up->mark == Mark::mid && rup->mark == Mark::right && up->bit != rup->bit)
                out.push_back({"B.branching", e, w, "extended zone disagrees on the bit"});
        }
    }
}

inline void computation_check_at(const LayeredPatch& p, const TileSet& ts, std::size_t e,
                                 std::vector<LayerViolation>& out) {
    const auto& h = p.element(e);
    auto R = detail::right_of(p, h);
    int seed = ts.find("seed");
    for (std::size_t w = 0; w < p.words(); ++w) {
        const auto& c = p.cell(e, w);
        if (!c.gamma) continue;
        int g = *c.gamma;
        if (g >= static_cast<int>(ts.tiles.size()) || g < -1) {
            out.push_back({"C.tile", e, w, "tile id out of range"});
            continue;
        }
        if (c.beta && (g == -1) != c.beta->empty())
            out.push_back({"C.overlay", e, w, "computation cell is empty exactly when the branch cell is not"});
        if (w == 0 && g != seed) out.push_back({"C.seed", e, w, "root cell must carry the seed tile"});
        if (g == -1) continue;
        const auto& t = ts[g];
        if (c.beta && !c.beta->empty() && t.mark != c.beta->mark)
            out.push_back({"C.mark", e, w, "tile role does not match the branch mark"});
        if (!c.beta || c.beta->empty()) continue;
        Mark m = c.beta->mark;
        if ((m == Mark::left || m == Mark::mid) && R) {
            if (const auto* rc = p.find(*R, w); rc && rc->beta && rc->gamma && *rc->gamma >= 0 &&
                                                (rc->beta->mark == Mark::mid || rc->beta->mark == Mark::right)) {
                if (t.right != ts[*rc->gamma].left)
                    out.push_back({"C.wang-horizontal", e, w, "right edge '" + t.right + "' meets '" +
                                                                  ts[*rc->gamma].left + "'"});
            }
        }
        if (static_cast<int>(word_level(w)) < p.depth()) {
            const auto& above = p.cell(e, child_index(w, c.beta->bit));
            if (above.gamma && *above.gamma >= 0 && t.top != ts[*above.gamma].bottom)
                out.push_back({"C.wang-vertical", e, w, "top edge '" + t.top + "' meets '" + ts[*above.gamma].bottom + "'"});
        }
    }
}

inline void tentacle_check_at(const LayeredPatch& p, const TileSet* ts, std::size_t e,
                              std::vector<LayerViolation>& out) {
    using detail::tau_at;
    const auto& G = p.group();
    const auto& h = p.element(e);
    for (std::size_t w = 0; w < p.words(); ++w) {
        const auto& c = p.cell(e, w);
        // Rule 9 looks back from (h, wb) to level |w|.
        if (w > 0 && c.tau && !c.tau->empty) {
            int b = last_bit(w);
            auto u = parent_index(w);
            bool licensed = false, unknown = false;
            if (const auto* below = tau_at(p, h, u)) {
                if (!below->empty && below->bit == b && !(below->comm == kDelete && !below->base())) licensed = true;
            } else {
                unknown = true;
            }
            for (int s = 1; s < G.num_generators() && !licensed; ++s) {
                auto from = G.mul(h, G.generator(Group::inverse_generator(s)));
                if (const auto* t = tau_at(p, from, u)) {
                    if (t->tip() && t->comm == s && t->bit == b) licensed = true;
                } else {
                    unknown = true;
                }
            }
            if (!licensed && !unknown) out.push_back({"T.no-new", e, w, "tentacle cell not produced by a command"});
        }
        if (!c.tau) continue;
        if (w == 0 && (c.tau->empty || c.tau->prev != 0 || c.tau->next != 0))
            out.push_back({"T.seed", e, w, "root cell must hold a one-cell tentacle"});
        if (c.tau->empty) continue;
        const auto& t = *c.tau;
        if (t.next != 0) {
            if (const auto* n = tau_at(p, G.mul(h, G.generator(t.next)), w)) {
                if (n->empty || n->prev != Group::inverse_generator(t.next))
                    out.push_back({"T.link-next", e, w, "successor does not point back"});
                else {
                    if (n->bit != t.bit) out.push_back({"T.bit", e, w, "bit differs from successor"});
                    if (n->symb != t.symb) out.push_back({"T.symb", e, w, "symbol differs from successor"});
                    if (n->comm != t.comm) out.push_back({"T.comm", e, w, "command differs from successor"});
                }
            }
        }
        if (t.prev != 0) {
            if (const auto* n = tau_at(p, G.mul(h, G.generator(t.prev)), w)) {
                if (n->empty || n->next != Group::inverse_generator(t.prev))
                    out.push_back({"T.link-prev", e, w, "predecessor does not point forward"});
                else {
                    if (n->bit != t.bit) out.push_back({"T.bit", e, w, "bit differs from predecessor"});
                    if (n->symb != t.symb) out.push_back({"T.symb", e, w, "symbol differs from predecessor"});
                    if (n->comm != t.comm) out.push_back({"T.comm", e, w, "command differs from predecessor"});
                }
            }
        }
        if (t.tip() && c.alpha && *c.alpha != t.symb)
            out.push_back({"T.tip-reads", e, w, "tip symbol differs from the alphabet layer"});
        if (t.base()) {
            if (c.beta && (c.beta->mark == Mark::seed || c.beta->mark == Mark::left) && c.beta->bit != t.bit)
                out.push_back({"T.base-bit", e, w, "base bit differs from the branch bit"});
            if (ts && c.gamma) {
                int g = *c.gamma;
                if (g < 0 || !(*ts)[g].squid) {
                    out.push_back({"T.base-command", e, w, "base is not on a squid tile"});
                } else {
                    int want = (*ts)[g].command ? *(*ts)[g].command : 0;
                    if (t.comm != want) out.push_back({"T.base-command", e, w, "command differs from the squid tile"});
                }
            }
            if (ts) {
                if (auto R = detail::right_of(p, h)) {
                    const auto* rc = p.find(*R, w);
                    if (rc && rc->gamma && *rc->gamma >= 0) {
                        const auto& rt = (*ts)[*rc->gamma];
                        if (rt.read_symbol && *rt.read_symbol != t.symb)
                            out.push_back({"T.read-coupling", e, w, "conditional tile reads a different symbol"});
                    }
                }
            }
        }
        if (static_cast<int>(word_level(w)) >= p.depth()) continue;
        auto wb = child_index(w, t.bit);
        const auto* up = tau_at(p, h, wb);
        if (t.comm == kDelete) {
            if (!t.base() && up && !up->empty) out.push_back({"T.delete-a", e, w, "deleted arm cell persists"});
            if (t.base() && up && (up->empty || up->prev != 0 || up->next != 0))
                out.push_back({"T.delete-b", e, w, "base must shrink to a one-cell tentacle"});
        } else {
            int s = t.comm;
            if (!t.tip() && up && (up->empty || up->prev != t.prev || up->next != t.next))
                out.push_back({"T.grow-a", e, w, "non-tip cell must persist unchanged"});
            if (t.tip()) {
                if (up && (up->empty || up->prev != t.prev || up->next != s))
                    out.push_back({"T.grow-b", e, w, "tip must point along the grow direction"});
                if (s != 0) {
                    const auto* nt = tau_at(p, G.mul(h, G.generator(s)), wb);
                    if (nt && (nt->empty || nt->prev != Group::inverse_generator(s) || nt->next != 0))
                        out.push_back({"T.grow-b", e, w, "new tip missing after growth"});
                }
            }
        }
    }
}

inline void final_state_check_at(const LayeredPatch& p, const TileSet& ts, std::size_t e,
                                  std::vector<LayerViolation>& out) {
    for (std::size_t w = 0; w < p.words(); ++w) {
        const auto& c = p.cell(e, w);
        if (c.gamma && *c.gamma >= 0 && ts[*c.gamma].final)
            out.push_back({"Z.final-state", e, w, "tile carries the final state"});
    }
}

enum class Checker { alphabet, directions, branching, computation, tentacle, final_state };

inline std::vector<LayerViolation> run_checker(Checker which, const LayeredPatch& p, const TileSet* ts,
                                               std::size_t alphabet_size) {
    std::vector<LayerViolation> out;
    for (std::size_t e = 0; e < p.elements(); ++e) {
        switch (which) {
            case Checker::alphabet: alphabet_check_at(p, e, alphabet_size, out); break;
            case Checker::directions: directions_check_at(p, e, out); break;
            case Checker::branching: branching_check_at(p, e, out); break;
            case Checker::computation:
                if (ts) computation_check_at(p, *ts, e, out);
                break;
            case Checker::tentacle: tentacle_check_at(p, ts, e, out); break;
            case Checker::final_state:
                if (ts) final_state_check_at(p, *ts, e, out);
                break;
        }
    }
    normalize(out);
    return out;
}

inline std::vector<LayerViolation> directions_check(const LayeredPatch& p) {
    return run_checker(Checker::directions, p, nullptr, 0);
}
inline std::vector<LayerViolation> branching_check(const LayeredPatch& p) {
    return run_checker(Checker::branching, p, nullptr, 0);
}
inline std::vector<LayerViolation> computation_check(const LayeredPatch& p, const TileSet& ts) {
    return run_checker(Checker::computation, p, &ts, 0);
}
inline std::vector<LayerViolation> tentacle_check(const LayeredPatch& p, const TileSet* ts = nullptr) {
    return run_checker(Checker::tentacle, p, ts, 0);
}

/// Every layer rule plus the final-state exclusion, split over element ranges.
inline std::vector<LayerViolation> verify_patch(const LayeredPatch& p, const TileSet& ts, unsigned threads = 1) {
    auto all = [&](std::size_t lo, std::size_t hi, std::vector<LayerViolation>& out) {
        for (std::size_t e = lo; e < hi; ++e) {
            alphabet_check_at(p, e, ts.alphabet.size(), out);
            directions_check_at(p, e, out);
            branching_check_at(p, e, out);
            computation_check_at(p, ts, e, out);
            tentacle_check_at(p, &ts, e, out);
            final_state_check_at(p, ts, e, out);
        }
    };
    std::vector<LayerViolation> out;
    threads = std::max(1u, threads);
    if (threads == 1 || p.elements() < 2) {
        all(0, p.elements(), out);
    } else {
        std::vector<std::vector<LayerViolation>> parts(threads);
        std::vector<std::thread> pool;
        std::size_t chunk = (p.elements() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::size_t lo = std::min(p.elements(), t * chunk), hi = std::min(p.elements(), lo + chunk);
            pool.emplace_back([&, t, lo, hi] { all(lo, hi, parts[t]); });
        }
        for (auto& th : pool) th.join();
        for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    }
    normalize(out);
    return out;
}

inline ConfigPatch root_factor(const LayeredPatch& p) {
    ConfigPatch out;
    out.radius = p.radius();
    for (std::size_t e = 0; e < p.elements(); ++e) {
        const auto& c = p.cell(e, 0);
        if (!c.alpha) throw BoundaryError("root cell " + p.group().format_element(p.element(e)) + " has no symbol");
        out.cells.emplace(p.element(e), *c.alpha);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Branch schedule.

inline bool is_power_level(int n) {
    int m = n + 1;
    return m > 0 && (m & (m - 1)) == 0;
}

/// Separation targets g(n) for levels n not of the form 2^k - 1.
class SeparationSchedule {
public:
    SeparationSchedule(const Group& H, int max_level) {
        int needed = 0;
        for (int n = 0; n <= max_level; ++n)
            if (!is_power_level(n)) ++needed;
        std::int64_t r = 1;
        std::vector<Element> elems;
        while (true) {
            elems = H.ball(r);
            if (2 * (static_cast<int>(elems.size()) - 1) >= needed) break;
            ++r;
        }
        std::size_t j = 0;
        for (int n = 0; n <= max_level; ++n) {
            if (is_power_level(n)) continue;
            const auto& h = elems[1 + j / 2];
            targets_[n] = {h, j % 2 == 0 ? +1 : -1};
            ++j;
        }
    }
    const std::pair<Element, int>& at(int n) const { return targets_.at(n); }
    bool has(int n) const { return targets_.count(n) > 0; }

private:
    std::map<int, std::pair<Element, int>> targets_;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Exponent k with x = t h^k for the canonical coset representative t of <h> in Z^d.
inline std::int64_t lattice_coset_exponent(const Element& x, const Element& h) {
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] == 0) continue;
        std::int64_t sign = h[i] > 0 ? 1 : -1;
        return sign * floor_div(x[i], h[i] * sign);
    }
    throw DomainError("identity has no cosets to separate");
}

/// Bits for exponents 0..kappa-1 of a torsion element: bit (k mod 2) at exponent m*k mod kappa.
inline std::vector<int> torsion_branch_bits(int kappa, int m) {
    if (kappa < 1) throw DomainError("order must be positive");
    std::vector<int> bits(static_cast<std::size_t>(kappa), 0);
    for (int k = 0; k < kappa; ++k) {
        int e = ((m * k) % kappa + kappa) % kappa;
        bits[static_cast<std::size_t>(e)] = k % 2;
    }
    return bits;
}

struct BranchSchedule {
    const Group* group = nullptr;
    int depth = 0;
    ElementIndex roots;
    std::vector<std::vector<int>> bits;   // bits[root][n]
    std::vector<std::vector<std::size_t>> words;  // words[root][n] = heap index of w_n(root)
};

/// Branch words of every root in B_R up to level `depth`, with zone collision detection.
inline BranchSchedule branch_schedule(const Group& H, std::int64_t R, int depth, int direction = 1) {
    if (H.kind() != GroupKind::lattice) throw DomainError("branch schedule is implemented for lattice groups");
    BranchSchedule bs;
    bs.group = &H;
    bs.depth = depth;
    bs.roots = ElementIndex(H.ball(R));
    auto N = bs.roots.size();
    bs.bits.assign(N, std::vector<int>(static_cast<std::size_t>(depth) + 1, 0));
    bs.words.assign(N, std::vector<std::size_t>(static_cast<std::size_t>(depth) + 2, 0));
    SeparationSchedule sep(H, depth);
    TranslationLikeAction T(H, direction);
    for (int n = 0; n <= depth; ++n) {
        auto un = static_cast<std::size_t>(n);
        if (is_power_level(n)) {
            // Alternate along each orbit among roots sharing a branch word.
            std::map<std::pair<Element, std::size_t>, std::vector<std::pair<std::int64_t, std::size_t>>> lines;
            for (std::size_t i = 0; i < N; ++i) {
                auto [rep, k] = H.cyclic_coordinates(bs.roots[i], direction);
                lines[{rep, bs.words[i][un]}].emplace_back(k, i);
            }
            for (auto& [key, pts] : lines) {
                std::sort(pts.begin(), pts.end());
                auto zero = std::lower_bound(pts.begin(), pts.end(), std::make_pair(std::int64_t{0}, std::size_t{0}));
                auto z = zero - pts.begin();
                for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(pts.size()); ++j) {
                    std::int64_t rank = j - z;
                    bs.bits[pts[static_cast<std::size_t>(j)].second][un] = static_cast<int>(((rank % 2) + 2) % 2);
                }
            }
        } else {
            const auto& [h, sign] = sep.at(n);
            (void)sign;
            for (std::size_t i = 0; i < N; ++i)
                bs.bits[i][un] = static_cast<int>(((lattice_coset_exponent(bs.roots[i], h) % 2) + 2) % 2);
        }
        for (std::size_t i = 0; i < N; ++i) bs.words[i][un + 1] = child_index(bs.words[i][un], bs.bits[i][un]);
    }
    // Zones: level n of root h covers T^j(h), j <= n, on w_n(h).
    for (int n = 0; n <= depth; ++n) {
        std::map<std::pair<Element, std::size_t>, std::size_t> owner;
        for (std::size_t i = 0; i < N; ++i) {
            Element x = bs.roots[i];
            for (int j = 0; j <= n; ++j) {
                auto [it, fresh] = owner.emplace(std::make_pair(x, bs.words[i][static_cast<std::size_t>(n)]), i);
                if (!fresh && it->second != i)
                    throw CollisionError("zones of " + H.format_element(bs.roots[it->second]) + " and " +
                                         H.format_element(bs.roots[i]) + " overlap at level " + std::to_string(n));
                x = T(x);
            }
        }
    }
    return bs;
}

// ---------------------------------------------------------------------------
// Witness builder.

struct WitnessOptions {
    MachineOptions machine;
    std::optional<int> fill;  // symbol used where the configuration is undefined
};

struct Witness {
    LayeredPatch patch;
    TileSet tiles;
    CompiledMachine machine;
    std::size_t simulated_roots = 0;
};

inline Witness witness_build(const Group& H, const ConfigPatch& x, std::int64_t radius, int depth,
                             const std::vector<PatternCoding>& codings, const Alphabet& A,
                             const WitnessOptions& opt = {}) {
    if (H.kind() != GroupKind::lattice) throw DomainError("witness_build is implemented for lattice groups");
    auto cm = machine_build(H, codings, A, opt.machine);
    auto ts = tile_set_build(cm.tm, H, A);
    std::int64_t m_max = 0;
    for (const auto& c : codings)
        for (const auto& [w, a] : c.entries) m_max = std::max<std::int64_t>(m_max, static_cast<std::int64_t>(H.geodesic(w).size()));

    LayeredPatch patch(H, radius, depth);
    std::int64_t R = radius + depth + m_max;
    auto sched = branch_schedule(H, R, depth);
    const int dir = 1;
    DirectionSym dsym{Group::inverse_generator(dir), dir};
    TranslationLikeAction T(H, dir);

    auto symbol_at = [&](const Element& g) -> int {
        if (auto v = x.at(g)) return *v;
        if (opt.fill) return *opt.fill;
        throw BoundaryError("configuration undefined at " + H.format_element(g));
    };

    for (std::size_t e = 0; e < patch.elements(); ++e) {
        int a = symbol_at(patch.element(e));
        for (std::size_t w = 0; w < patch.words(); ++w) {
            auto& c = patch.cell(e, w);
            c.alpha = a;
            c.delta = dsym;
            c.beta = BranchSym{};
            c.gamma = -1;
            c.tau = TentacleSym{};
        }
    }

    std::map<std::pair<Element, std::size_t>, std::size_t> tentacle_owner;
    for (std::size_t i = 0; i < sched.roots.size(); ++i) {
        const auto& h = sched.roots[i];
        auto steps = static_cast<std::size_t>(std::max(0, depth - 3));
        auto run = run_machine(ts.machine, H, h, symbol_at, steps);
        auto rows = lay_zone(ts, run, depth);
        TentaclePath path;
        path.cells.push_back(h);
        for (int n = 0; n <= depth; ++n) {
            auto un = static_cast<std::size_t>(n);
            auto w = sched.words[i][un];
            int b = sched.bits[i][un];
            Element pos = h;
            for (int j = 0; j <= n; ++j) {
                if (auto* c = patch.find(pos, w)) {
                    Mark m = n == 0 ? Mark::seed : j == 0 ? Mark::left : j == n ? Mark::right : Mark::mid;
                    c->beta = BranchSym{m, b};
                    c->gamma = rows[un][static_cast<std::size_t>(j)];
                }
                pos = T(pos);
            }
            int comm = 0;
            if (n >= 4 && run.steps[un - 4].command) comm = *run.steps[un - 4].command;
            int symb = symbol_at(path.tip());
            for (std::size_t k = 0; k < path.cells.size(); ++k) {
                auto [it, fresh] = tentacle_owner.emplace(std::make_pair(path.cells[k], w), i);
                if (!fresh && it->second != i)
                    throw CollisionError("tentacles of " + H.format_element(sched.roots[it->second]) + " and " +
                                         H.format_element(h) + " meet at level " + std::to_string(n));
                if (auto* c = patch.find(path.cells[k], w)) {
                    TentacleSym t;
                    t.empty = false;
                    t.bit = b;
                    t.prev = k == 0 ? 0 : Group::inverse_generator(path.letters[k - 1]);
                    t.next = k + 1 == path.cells.size() ? 0 : path.letters[k];
                    t.symb = symb;
                    t.comm = comm;
                    c->tau = t;
                }
            }
            path.apply(H, comm);
        }
    }
    return {std::move(patch), std::move(ts), std::move(cm), sched.roots.size()};
}

}  // namespace forge
