#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "forge/errors.hpp"
#include "forge/group.hpp"
#include "forge/rooted_sft.hpp"
#include "forge/tiles.hpp"
#include "forge/tree_shift.hpp"

namespace forge {

/// Counts per rule family ("B", "C", ...).
inline std::map<std::string, std::size_t> rule_family_counts(const std::vector<LayerViolation>& v) {
    std::map<std::string, std::size_t> out;
    for (const auto& x : v) ++out[x.rule.substr(0, x.rule.find('.'))];
    return out;
}

// ---------------------------------------------------------------------------
// Bounded completion search.

enum class Layer { alpha, delta, beta, gamma, tau };

inline const char* layer_name(Layer l) {
    switch (l) {
        case Layer::alpha: return "alpha";
        case Layer::delta: return "delta";
        case Layer::beta: return "beta";
        case Layer::gamma: return "gamma";
        case Layer::tau: return "tau";
    }
    return "?";
}

/// Candidate values per layer, placeholder last.
struct LayerDomains {
    int alpha = 0;
    std::vector<DirectionSym> delta;
    std::vector<BranchSym> beta;
    std::vector<int> gamma;
    std::vector<TentacleSym> tau;

    std::size_t size(Layer l) const {
        switch (l) {
            case Layer::alpha: return static_cast<std::size_t>(alpha);
            case Layer::delta: return delta.size();
            case Layer::beta: return beta.size();
            case Layer::gamma: return gamma.size();
            case Layer::tau: return tau.size();
        }
        return 0;
    }

    void assign(LayerCell& c, Layer l, std::size_t k) const {
        switch (l) {
            case Layer::alpha: c.alpha = static_cast<int>(k); break;
            case Layer::delta: c.delta = delta[k]; break;
            case Layer::beta: c.beta = beta[k]; break;
            case Layer::gamma: c.gamma = gamma[k]; break;
            case Layer::tau: c.tau = tau[k]; break;
        }
    }
};

inline void clear_layer(LayerCell& c, Layer l) {
    switch (l) {
        case Layer::alpha: c.alpha.reset(); break;
        case Layer::delta: c.delta.reset(); break;
        case Layer::beta: c.beta.reset(); break;
        case Layer::gamma: c.gamma.reset(); break;
        case Layer::tau: c.tau.reset(); break;
    }
}

inline bool layer_set(const LayerCell& c, Layer l) {
    switch (l) {
        case Layer::alpha: return c.alpha.has_value();
        case Layer::delta: return c.delta.has_value();
        case Layer::beta: return c.beta.has_value();
        case Layer::gamma: return c.gamma.has_value();
        case Layer::tau: return c.tau.has_value();
    }
    return false;
}

inline LayerDomains layer_domains(const Group& H, const TileSet& ts) {
    LayerDomains d;
    d.alpha = static_cast<int>(ts.alphabet.size());
    int ng = H.num_generators();
    for (int l = 1; l < ng; ++l)
        for (int r = 1; r < ng; ++r) d.delta.push_back({l, r});
    for (Mark m : {Mark::seed, Mark::left, Mark::mid, Mark::right})
        for (int b = 0; b < 2; ++b) d.beta.push_back({m, b});
    d.beta.push_back({Mark::empty, 0});
    for (std::size_t i = 0; i < ts.tiles.size(); ++i) d.gamma.push_back(static_cast<int>(i));
    d.gamma.push_back(-1);
    std::vector<int> comms{0};
    for (int s = 1; s < ng; ++s) comms.push_back(s);
    comms.push_back(kDelete);
    for (int bit = 0; bit < 2; ++bit)
        for (int prev = 0; prev < ng; ++prev)
            for (int next = 0; next < ng; ++next)
                for (int symb = 0; symb < d.alpha; ++symb)
                    for (int comm : comms) {
                        TentacleSym t;
                        t.empty = false;
                        t.bit = bit;
                        t.prev = prev;
                        t.next = next;
                        t.symb = symb;
                        t.comm = comm;
                        d.tau.push_back(t);
                    }
    d.tau.push_back(TentacleSym{});
    return d;
}

struct CompleteOptions {
    std::size_t cell_cap = 400;
    std::size_t node_budget = global_budget();
    bool count_all = false;
};

enum class CompleteOutcome { completed, exhausted, budget_exceeded };

inline const char* to_string(CompleteOutcome o) {
    switch (o) {
        case CompleteOutcome::completed: return "completed";
        case CompleteOutcome::exhausted: return "exhausted";
        case CompleteOutcome::budget_exceeded: return "budget_exceeded";
    }
    return "?";
}

struct CompleteStats {
    std::size_t variables = 0;
    std::size_t nodes = 0;
    std::size_t backtracks = 0;
    std::size_t solutions = 0;
};

struct CompleteResult {
    CompleteOutcome outcome = CompleteOutcome::exhausted;
    std::optional<LayeredPatch> patch;
    CompleteStats stats;
};

struct SearchVar {
    std::size_t element = 0;
    std::size_t word = 0;
    Layer layer = Layer::alpha;
};

/// Unset layers in search order: (level, H-shortlex), then alpha, delta, beta, gamma, tau.
inline std::vector<SearchVar> search_variables(const LayeredPatch& p) {
    std::vector<SearchVar> out;
    for (int n = 0; n <= p.depth(); ++n) {
        std::size_t lo = word_count(n - 1), hi = word_count(n);
        for (std::size_t e = 0; e < p.elements(); ++e)
            for (std::size_t w = lo; w < hi; ++w)
                for (Layer l : {Layer::alpha, Layer::delta, Layer::beta, Layer::gamma, Layer::tau})
                    if (!layer_set(p.cell(e, w), l)) out.push_back({e, w, l});
    }
    return out;
}

namespace detail {

class Completer {
public:
    Completer(const LayeredPatch& p, const TileSet& ts, const CompleteOptions& opt)
        : work_(p), ts_(ts), opt_(opt), dom_(layer_domains(p.group(), ts)), vars_(search_variables(p)) {
        const auto& G = p.group();
        near_.resize(p.elements());
        for (std::size_t e = 0; e < p.elements(); ++e) {
            std::set<std::size_t> s;
            for (int g = 0; g < G.num_generators(); ++g) {
                auto i = p.element_index(G.mul(p.element(e), G.generator(g)));
                if (i >= 0) s.insert(static_cast<std::size_t>(i));
            }
            near_[e].assign(s.begin(), s.end());
        }
    }

    CompleteResult run() {
        CompleteResult r;
        r.stats.variables = vars_.size();
        for (std::size_t e = 0; e < work_.elements(); ++e)
            if (violated_at(e)) return finish(r);
        search(0, r);
        return finish(r);
    }

private:
    bool violated_at(std::size_t e) const {
        std::vector<LayerViolation> out;
        alphabet_check_at(work_, e, ts_.alphabet.size(), out);
        directions_check_at(work_, e, out);
        branching_check_at(work_, e, out);
        computation_check_at(work_, ts_, e, out);
        tentacle_check_at(work_, &ts_, e, out);
        final_state_check_at(work_, ts_, e, out);
        return !out.empty();
    }

    bool consistent(std::size_t e) const {
        for (auto a : near_[e])
            if (violated_at(a)) return false;
        return true;
    }

    // Returns false when the search must stop.
    bool search(std::size_t i, CompleteResult& r) {
        if (i == vars_.size()) {
            if (!verify_patch(work_, ts_).empty()) return true;
            ++r.stats.solutions;
            if (!r.patch) r.patch = work_;
            return opt_.count_all;
        }
        const auto& v = vars_[i];
        auto& cell = work_.cell(v.element, v.word);
        for (std::size_t k = 0; k < dom_.size(v.layer); ++k) {
            if (++r.stats.nodes > opt_.node_budget) {
                over_budget_ = true;
                clear_layer(cell, v.layer);
                return false;
            }
            dom_.assign(cell, v.layer, k);
            if (consistent(v.element) && !search(i + 1, r)) {
                clear_layer(cell, v.layer);
                return false;
            }
        }
        clear_layer(cell, v.layer);
        ++r.stats.backtracks;
        return true;
    }

    CompleteResult& finish(CompleteResult& r) const {
        if (over_budget_)
            r.outcome = CompleteOutcome::budget_exceeded;
        else
            r.outcome = r.stats.solutions ? CompleteOutcome::completed : CompleteOutcome::exhausted;
        return r;
    }

    LayeredPatch work_;
    const TileSet& ts_;
    CompleteOptions opt_;
    LayerDomains dom_;
    std::vector<SearchVar> vars_;
    std::vector<std::vector<std::size_t>> near_;
    bool over_budget_ = false;
};

}  // namespace detail

/// Backtracking completion of the unset layers against every layer rule.
inline CompleteResult complete(const LayeredPatch& p, const TileSet& ts, const CompleteOptions& opt = {}) {
    std::size_t cells = p.elements() * p.words();
    if (cells > opt.cell_cap)
        throw SpecError("patch has " + std::to_string(cells) + " cells, cap is " + std::to_string(opt.cell_cap));
    detail::Completer c(p, ts, opt);
    return c.run();
}

// ---------------------------------------------------------------------------
// Coupling of a rooted SFT with the tree shift over H x F2.

constexpr int kStar = -1;

struct RootedPattern {
    struct Entry {
        Element g;
        std::vector<int> w;
        int symbol = 0;
    };
    std::vector<Entry> entries;
};

struct CoupledPatch {
    Group H = Group::lattice(1);
    TreePatch tree;
    std::map<std::pair<Element, Element>, int> y;  // (h, n) -> symbol or kStar
    int b_size = 2;
    std::set<int> b0;
    std::vector<RootedPattern> forbidden;
};

struct CoupledViolation {
    std::string rule;
    Element h, n;
    std::string detail;

    auto key() const { return std::tie(h, n, rule, detail); }
    bool operator<(const CoupledViolation& o) const { return key() < o.key(); }
    bool operator==(const CoupledViolation& o) const { return key() == o.key(); }
};

inline std::vector<CoupledViolation> coupled_check(const CoupledPatch& p) {
    Group N = Group::free(2);
    if (!check_tree_constraints(N, p.tree).empty()) throw SpecError("tree patch violates the tree-shift rules");
    auto y_at = [&](const Element& h, const Element& n) -> std::optional<int> {
        auto it = p.y.find({h, n});
        if (it == p.y.end()) return std::nullopt;
        return it->second;
    };
    std::vector<CoupledViolation> out;
    for (const auto& [key, v] : p.y) {
        const auto& [h, n] = key;
        if (v != kStar && (v < 0 || v >= p.b_size)) out.push_back({"Y.symbol", h, n, "symbol out of range"});
        const auto* t = p.tree.find(n);
        if (!t) continue;
        auto r = N.mul(n, N.generator(root_of(*t)));
        if (auto yr = y_at(h, r); yr && !p.b0.count(*yr))
            out.push_back({"Y.root", h, n, "root target " + N.format_element(r) + " is outside the seed alphabet"});
        for (int b = 0; b < 2; ++b) {
            auto nb = N.mul(n, N.generator(son_of(*t, b)));
            if (auto ys = y_at(h, nb); ys && ((v == kStar) != (*ys == kStar)))
                out.push_back({"Y.extra-symbol", h, n, "star marking differs at son " + std::to_string(b)});
        }
        for (std::size_t k = 0; k < p.forbidden.size(); ++k) {
            bool all_match = true, known = true;
            for (const auto& e : p.forbidden[k].entries) {
                try {
                    auto m = gamma(N, p.tree, e.w, n);
                    auto val = y_at(p.H.mul(h, e.g), m);
                    if (!val) {
                        known = false;
                        break;
                    }
                    if (*val != e.symbol) {
                        all_match = false;
                        break;
                    }
                } catch (const BoundaryError&) {
                    known = false;
                    break;
                }
            }
            if (known && all_match) out.push_back({"Y.pattern", h, n, "forbidden pattern " + std::to_string(k)});
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// m = gamma(w, n) for the tree of `map`, or nullopt when m is unreachable.
inline std::optional<std::pair<Element, std::vector<int>>> reach_decompose(const ParadoxicalMap& map, const Element& m) {
    auto color = [&](const Element& g) {
        auto sib = map.preimages(map.phi(g));
        return static_cast<int>(std::find(sib.begin(), sib.end(), g) - sib.begin());
    };
    std::vector<int> w;
    Element cur = m;
    while (!ParadoxicalMap::on_ray(cur)) {
        auto up = map.phi(cur);
        int diff = ((color(cur) - color(up)) % 3 + 3) % 3;
        if (diff == 2) {
            std::reverse(w.begin(), w.end());
            return std::make_pair(up, w);
        }
        w.push_back(diff);
        cur = up;
    }
    return std::nullopt;
}

/// z(h, w0) = z(h, w) and z(h, w1) != z(h, w) over B = {0, 1}.
inline std::vector<RootedPattern> parity_patterns(const Group& H) {
    std::vector<RootedPattern> out;
    auto one = H.identity();
    for (int a = 0; a < 2; ++a) {
        out.push_back({{{one, {}, a}, {one, {0}, 1 - a}}});
        out.push_back({{{one, {}, a}, {one, {1}, a}}});
    }
    return out;
}

/// y(h, m) = x(h, n) xor parity(w) for m = gamma(w, n), and * on unreachable m.
inline CoupledPatch coupled_build(const Group& H, std::int64_t h_radius, std::int64_t n_radius, std::int64_t tree_radius,
                                  const std::function<int(const Element&, const Element&)>& x) {
    ParadoxicalMap map;
    const auto& N = map.group();
    CoupledPatch p;
    p.H = H;
    p.tree = tau_build(map, tree_radius);
    p.b_size = 2;
    p.b0 = {0, 1};
    p.forbidden = parity_patterns(H);
    auto hs = H.ball(h_radius);
    for (const auto& m : N.ball(n_radius)) {
        auto dec = reach_decompose(map, m);
        for (const auto& h : hs) {
            if (!dec) {
                p.y[{h, m}] = kStar;
                continue;
            }
            int parity = 0;
            for (int b : dec->second) parity ^= b;
            p.y[{h, m}] = x(h, dec->first) ^ parity;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Rendering.

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out;
}

/// Column order: coordinate order on Z, shortlex otherwise.
inline std::vector<std::size_t> render_columns(const LayeredPatch& p) {
    std::vector<std::size_t> cols(p.elements());
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
    if (p.group().kind() == GroupKind::lattice && p.group().dim() == 1)
        std::sort(cols.begin(), cols.end(), [&](auto a, auto b) { return p.element(a)[0] < p.element(b)[0]; });
    return cols;
}

inline bool cell_nonempty(const LayerCell& c) {
    return (c.beta && !c.beta->empty()) || (c.gamma && *c.gamma >= 0) || (c.tau && !c.tau->empty);
}

inline std::string cell_label(const LayerCell& c, const TileSet* ts) {
    std::string s;
    if (c.beta && !c.beta->empty()) s += std::string(mark_name(c.beta->mark)) + std::to_string(c.beta->bit);
    if (c.gamma && *c.gamma >= 0) {
        if (!s.empty()) s += " ";
        s += ts ? (*ts)[*c.gamma].name : "#" + std::to_string(*c.gamma);
    }
    return s;
}

}  // namespace detail

inline std::string render_svg(const LayeredPatch& p, const TileSet* ts, const std::vector<LayerViolation>& marks = {}) {
    constexpr int cw = 96, ch = 28, margin = 60;
    auto cols = detail::render_columns(p);
    std::vector<std::size_t> col_of(p.elements());
    for (std::size_t i = 0; i < cols.size(); ++i) col_of[cols[i]] = i;
    std::vector<std::size_t> rows;
    for (std::size_t w = 0; w < p.words(); ++w)
        for (std::size_t e = 0; e < p.elements(); ++e)
            if (detail::cell_nonempty(p.cell(e, w))) {
                rows.push_back(w);
                break;
            }
    std::map<std::size_t, std::size_t> row_of;
    for (std::size_t i = 0; i < rows.size(); ++i) row_of[rows[i]] = rows.size() - 1 - i;
    std::set<std::pair<std::size_t, std::size_t>> bad;
    for (const auto& v : marks) bad.insert({v.element, v.word});

    std::size_t width = margin + cols.size() * cw + 10, height = margin + rows.size() * ch + 10;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"monospace\" font-size=\"10\">\n";
    os << "<defs><marker id=\"arrow\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" orient=\"auto\">"
          "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"#1f6fb2\"/></marker></defs>\n";
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << "<text x=\"" << margin + i * cw + cw / 2 << "\" y=\"14\" text-anchor=\"middle\">"
           << detail::xml_escape(p.group().format_element(p.element(cols[i]))) << "</text>\n";
    for (auto w : rows) {
        auto y = margin + row_of[w] * ch;
        std::string label = w == 0 ? "e" : format_bits(index_to_word(w));
        os << "<text x=\"4\" y=\"" << y + ch / 2 + 4 << "\">" << detail::xml_escape(label) << "</text>\n";
        for (std::size_t e = 0; e < p.elements(); ++e) {
            const auto& c = p.cell(e, w);
            auto x = margin + col_of[e] * cw;
            bool flagged = bad.count({e, w}) > 0;
            if (!detail::cell_nonempty(c) && !flagged) continue;
            os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\""
               << (c.beta && c.beta->mark == Mark::seed ? "#fde9b8" : "#eef3f8") << "\" stroke=\""
               << (flagged ? "#d62728" : "#8899aa") << "\" stroke-width=\"" << (flagged ? 2 : 1) << "\"/>\n";
            os << "<text x=\"" << x + 3 << "\" y=\"" << y + ch / 2 + 4 << "\">"
               << detail::xml_escape(detail::cell_label(c, ts)) << "</text>\n";
        }
        for (std::size_t e = 0; e < p.elements(); ++e) {
            const auto& c = p.cell(e, w);
            if (!c.tau || c.tau->empty || c.tau->next == 0) continue;
            auto to = p.element_index(p.group().mul(p.element(e), p.group().generator(c.tau->next)));
            if (to < 0) continue;
            auto x1 = margin + col_of[e] * cw + cw / 2;
            auto x2 = margin + col_of[static_cast<std::size_t>(to)] * cw + cw / 2;
            os << "<line x1=\"" << x1 << "\" y1=\"" << y + ch - 4 << "\" x2=\"" << x2 << "\" y2=\"" << y + ch - 4
               << "\" stroke=\"#1f6fb2\" marker-end=\"url(#arrow)\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

inline std::string render_dot(const LayeredPatch& p, const TileSet* ts, const std::vector<LayerViolation>& marks = {}) {
    std::set<std::pair<std::size_t, std::size_t>> bad;
    for (const auto& v : marks) bad.insert({v.element, v.word});
    auto id = [](std::size_t e, std::size_t w) { return "c" + std::to_string(e) + "_" + std::to_string(w); };
    std::ostringstream os;
    os << "digraph patch {\n  node [shape=box, fontname=\"monospace\"];\n";
    for (std::size_t w = 0; w < p.words(); ++w)
        for (std::size_t e = 0; e < p.elements(); ++e) {
            const auto& c = p.cell(e, w);
            bool flagged = bad.count({e, w}) > 0;
            if (!detail::cell_nonempty(c) && !flagged) continue;
            std::string where = p.group().format_element(p.element(e)) + " / " +
                                (w == 0 ? std::string("e") : format_bits(index_to_word(w)));
            os << "  " << id(e, w) << " [label=\"" << detail::dot_escape(where) << "\\n" << detail::dot_escape(detail::cell_label(c, ts))
               << "\"" << (flagged ? ", color=red, penwidth=2" : "") << "];\n";
        }
    for (std::size_t w = 0; w < p.words(); ++w)
        for (std::size_t e = 0; e < p.elements(); ++e) {
            const auto& c = p.cell(e, w);
            if (c.beta && !c.beta->empty() && word_level(w) < p.depth()) {
                auto up = child_index(w, c.beta->bit);
                if (detail::cell_nonempty(p.cell(e, up))) os << "  " << id(e, w) << " -> " << id(e, up) << " [style=dotted];\n";
            }
            if (c.tau && !c.tau->empty && c.tau->next != 0) {
                auto to = p.element_index(p.group().mul(p.element(e), p.group().generator(c.tau->next)));
                if (to >= 0) os << "  " << id(e, w) << " -> " << id(static_cast<std::size_t>(to), w) << " [color=blue];\n";
            }
        }
    os << "}\n";
    return os.str();
}

/// Space-time diagram of one zone: row 0 at the bottom, one cell per tile.
inline std::string render_diagram(const TileSet& ts, const std::vector<std::vector<int>>& rows) {
    constexpr int cw = 120, ch = 26;
    std::size_t ncols = 0;
    for (const auto& r : rows) ncols = std::max(ncols, r.size());
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << ncols * cw + 50 << "\" height=\"" << rows.size() * ch + 10
       << "\" font-family=\"monospace\" font-size=\"10\">\n";
    for (std::size_t n = 0; n < rows.size(); ++n) {
        auto y = (rows.size() - 1 - n) * ch + 5;
        os << "<text x=\"4\" y=\"" << y + ch / 2 + 4 << "\">" << n << "</text>\n";
        for (std::size_t i = 0; i < rows[n].size(); ++i) {
            const auto& t = ts[rows[n][i]];
            auto x = 40 + i * cw;
            os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\""
               << (t.final ? "#f7c6c6" : t.squid ? "#d8ecd2" : "#eef3f8") << "\" stroke=\"#8899aa\"/>\n";
            os << "<text x=\"" << x + 3 << "\" y=\"" << y + ch / 2 + 4 << "\">" << detail::xml_escape(t.name)
               << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace forge
