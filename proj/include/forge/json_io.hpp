#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/errors.hpp"
#include "forge/group.hpp"
#include "forge/nonsofic.hpp"
#include "forge/patch_lab.hpp"
#include "forge/rooted_sft.hpp"
#include "forge/subshift.hpp"
#include "forge/tiles.hpp"
#include "forge/toeplitz.hpp"
#include "forge/tree_shift.hpp"
#include "forge/turing.hpp"

namespace forge {

using Json = nlohmann::json;

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

namespace detail {

template <class T>
T get_as(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw FormatError(std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Groups and elements.

/// "Z", "Z2", "Z^3", "F2", "F_3", "Z x F2".
inline Group parse_group_name(const std::string& text) {
    auto cut = text.find(" x ");
    if (cut != std::string::npos)
        return Group::product(parse_group_name(text.substr(0, cut)), parse_group_name(text.substr(cut + 3)));
    if (text.empty()) throw FormatError("empty group name");
    std::string rest = text.substr(1);
    if (!rest.empty() && (rest[0] == '^' || rest[0] == '_')) rest = rest.substr(1);
    int n = 1;
    if (!rest.empty()) {
        try {
            std::size_t used = 0;
            n = std::stoi(rest, &used);
            if (used != rest.size()) throw std::invalid_argument(rest);
        } catch (const std::exception&) {
            throw FormatError("bad group name '" + text + "'");
        }
    }
    if (n < 1) throw FormatError("group parameter must be positive in '" + text + "'");
    if (text[0] == 'Z' || text[0] == 'z') return Group::lattice(n);
    if (text[0] == 'F' || text[0] == 'f') {
        if (rest.empty()) throw FormatError("free group needs a rank");
        return Group::free(n);
    }
    throw FormatError("bad group name '" + text + "'");
}

inline Json group_to_json(const Group& G) {
    switch (G.kind()) {
        case GroupKind::lattice: return {{"kind", "lattice"}, {"dim", G.dim()}};
        case GroupKind::free: return {{"kind", "free"}, {"rank", G.rank()}};
        case GroupKind::product: return {{"kind", "product"}, {"left", group_to_json(G.left())}, {"right", group_to_json(G.right())}};
    }
    return {};
}

inline Group group_from_json(const Json& j) {
    if (j.is_string()) return parse_group_name(j.get<std::string>());
    auto kind = detail::get_as<std::string>(j, "kind");
    if (kind == "lattice") return Group::lattice(detail::get_as<int>(j, "dim"));
    if (kind == "free") return Group::free(detail::get_as<int>(j, "rank"));
    if (kind == "product") return Group::product(group_from_json(j.at("left")), group_from_json(j.at("right")));
    throw FormatError("unknown group kind '" + kind + "'");
}

/// Elements are written as shortlex normal words: "a b-", "1".
inline Element element_from_json(const Group& G, const Json& j) {
    if (!j.is_string()) throw FormatError("element must be a word string");
    return G.eval(G.parse_word(j.get<std::string>()));
}

inline Word word_from_json(const Group& G, const Json& j) {
    if (j.is_string()) return G.parse_word(j.get<std::string>());
    if (!j.is_array()) throw FormatError("word must be a string or an array of generator names");
    Word w;
    for (const auto& x : j) w.push_back(G.generator_index(x.get<std::string>()));
    return w;
}

inline Json word_to_json(const Group& G, const Word& w) {
    Json out = Json::array();
    for (int s : w) out.push_back(G.generator_name(s));
    return out;
}

// ---------------------------------------------------------------------------
// Subshift specifications and configuration patches.

inline Alphabet alphabet_from_json(const Json& j) {
    if (!j.is_array()) throw FormatError("alphabet must be an array of names");
    return Alphabet(j.get<std::vector<std::string>>());
}

inline Json coding_to_json(const Group& G, const Alphabet& A, const PatternCoding& c) {
    Json out = Json::array();
    for (const auto& [w, a] : c.entries) out.push_back({word_to_json(G, w), A[static_cast<std::size_t>(a)]});
    return out;
}

inline PatternCoding coding_from_json(const Group& G, const Alphabet& A, const Json& j) {
    if (!j.is_array()) throw FormatError("coding must be an array of [word, symbol] pairs");
    PatternCoding c;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2) throw FormatError("coding entry must be [word, symbol]");
        c.entries.emplace_back(word_from_json(G, e[0]), A.index(e[1].get<std::string>()));
    }
    return c;
}

struct SubshiftDoc {
    Group group = Group::lattice(1);
    SubshiftSpec spec;
};

inline SubshiftDoc subshift_from_json(const Json& j, const std::optional<Group>& group_override = std::nullopt) {
    SubshiftDoc d;
    if (group_override)
        d.group = *group_override;
    else if (j.contains("group"))
        d.group = group_from_json(j.at("group"));
    d.spec.alphabet = alphabet_from_json(j.at("alphabet"));
    const auto& c = j.at("codings");
    if (c.is_object()) {
        auto gen = detail::get_as<std::string>(c, "generator");
        if (gen == "reflection") {
            d.spec.source = SubshiftSpec::Source::reflection;
            d.spec.parameter = detail::get_as<std::int64_t>(c, "max_word_len");
        } else if (gen == "ball-mimic") {
            d.spec.source = SubshiftSpec::Source::ball_mimic;
            d.spec.parameter = detail::get_as<std::int64_t>(c, "n_max");
        } else {
            throw FormatError("unknown coding generator '" + gen + "'");
        }
    } else {
        for (const auto& x : c) d.spec.codings.push_back(coding_from_json(d.group, d.spec.alphabet, x));
    }
    return d;
}

inline Json subshift_to_json(const SubshiftDoc& d) {
    Json out;
    out["group"] = group_to_json(d.group);
    out["alphabet"] = d.spec.alphabet.symbols;
    switch (d.spec.source) {
        case SubshiftSpec::Source::explicit_list: {
            Json arr = Json::array();
            for (const auto& c : d.spec.codings) arr.push_back(coding_to_json(d.group, d.spec.alphabet, c));
            out["codings"] = arr;
            break;
        }
        case SubshiftSpec::Source::reflection:
            out["codings"] = {{"generator", "reflection"}, {"max_word_len", d.spec.parameter}};
            break;
        case SubshiftSpec::Source::ball_mimic:
            out["codings"] = {{"generator", "ball-mimic"}, {"n_max", d.spec.parameter}};
            break;
    }
    return out;
}

/// {"radius": r, "fill": sym?, "cells": [[element, sym], ...]}; fill covers the ball of radius r.
inline ConfigPatch config_from_json(const Group& G, const Alphabet& A, const Json& j) {
    ConfigPatch p;
    p.radius = detail::get_as<std::int64_t>(j, "radius");
    if (j.contains("fill")) {
        int f = A.index(j.at("fill").get<std::string>());
        for (const auto& g : G.ball(p.radius)) p.cells[g] = f;
    }
    if (j.contains("cells"))
        for (const auto& c : j.at("cells")) {
            if (!c.is_array() || c.size() != 2) throw FormatError("patch cell must be [element, symbol]");
            p.cells[element_from_json(G, c[0])] = A.index(c[1].get<std::string>());
        }
    return p;
}

inline Json config_to_json(const Group& G, const Alphabet& A, const ConfigPatch& p) {
    std::vector<Element> order;
    for (const auto& kv : p.cells) order.push_back(kv.first);
    G.sort_shortlex(order);
    Json cells = Json::array();
    for (const auto& g : order) cells.push_back({G.format_element(g), A[static_cast<std::size_t>(p.cells.at(g))]});
    return {{"group", group_to_json(G)}, {"alphabet", A.symbols}, {"radius", p.radius}, {"cells", cells}};
}

inline Json violations_to_json(const Group& G, const std::vector<Violation>& v, const std::vector<PatternCoding>& codings,
                               const Alphabet& A) {
    Json out = Json::array();
    for (const auto& x : v)
        out.push_back({{"coding", x.coding}, {"at", G.format_element(x.at)},
                       {"pattern", coding_to_json(G, A, codings[x.coding])}});
    return out;
}

// ---------------------------------------------------------------------------
// Tree patches: word -> [s0, s1, s2, p, c].

inline Json tree_to_json(const TreePatch& t, std::int64_t radius) {
    Group N = Group::free(2);
    std::vector<Element> order;
    for (const auto& kv : t.cells) order.push_back(kv.first);
    N.sort_shortlex(order);
    Json cells = Json::array();
    for (const auto& g : order) {
        const auto& s = t.cells.at(g);
        cells.push_back({N.format_element(g),
                         {N.generator_name(s.s[0]), N.generator_name(s.s[1]), N.generator_name(s.s[2]),
                          N.generator_name(s.p), s.c}});
    }
    return {{"group", "F2"}, {"radius", radius}, {"cells", cells}};
}

inline TreePatch tree_from_json(const Json& j) {
    Group N = Group::free(2);
    TreePatch t;
    for (const auto& c : j.at("cells")) {
        if (!c.is_array() || c.size() != 2 || !c[1].is_array() || c[1].size() != 5)
            throw FormatError("tree cell must be [element, [s0, s1, s2, p, c]]");
        TreeSymbol s;
        for (std::size_t i = 0; i < 3; ++i) s.s[i] = N.generator_index(c[1][i].get<std::string>());
        s.p = N.generator_index(c[1][3].get<std::string>());
        s.c = c[1][4].get<int>();
        t.cells[element_from_json(N, c[0])] = s;
    }
    return t;
}

// ---------------------------------------------------------------------------
// Machines and tile sets.

inline Json machine_to_json(const TuringMachine& tm) {
    Json delta = Json::array();
    for (const auto& [key, a] : tm.delta)
        delta.push_back({tm.states[static_cast<std::size_t>(key.first)], tm.symbols[static_cast<std::size_t>(key.second)],
                         tm.symbols[static_cast<std::size_t>(a.write)], tm.states[static_cast<std::size_t>(a.state)],
                         a.move});
    return {{"states", tm.states},
            {"symbols", tm.symbols},
            {"initial", tm.states[static_cast<std::size_t>(tm.q0)]},
            {"final", tm.states[static_cast<std::size_t>(tm.qF)]},
            {"transitions", delta}};
}

inline std::vector<std::string> tile_keys(const TileSet& ts) {
    std::vector<std::string> keys(ts.tiles.size());
    for (const auto& [k, i] : ts.by_key) keys[static_cast<std::size_t>(i)] = k;
    return keys;
}

inline Json tiles_to_json(const TileSet& ts) {
    auto keys = tile_keys(ts);
    Json arr = Json::array();
    for (std::size_t i = 0; i < ts.tiles.size(); ++i) {
        const auto& t = ts.tiles[i];
        Json o{{"key", keys[i]},   {"name", t.name},      {"top", t.top},   {"bottom", t.bottom},
               {"left", t.left}, {"right", t.right}, {"mark", mark_name(t.mark)}, {"squid", t.squid},
               {"final", t.final}};
        if (t.command) o["command"] = ts.command_names.at(*t.command);
        if (t.read_symbol) o["read"] = ts.alphabet[static_cast<std::size_t>(*t.read_symbol)];
        arr.push_back(o);
    }
    return {{"count", ts.count()}, {"machine", machine_to_json(ts.machine)}, {"tiles", arr}};
}

// ---------------------------------------------------------------------------
// Layered patches. The document carries the subshift so the tile set can be rebuilt.

struct LayeredDoc {
    SubshiftDoc subshift;
    MachineOptions machine;
    std::optional<LayeredPatch> patch;
};

inline TileSet layered_tiles(const LayeredDoc& d) {
    const auto& H = d.subshift.group;
    auto cm = machine_build(H, d.subshift.spec.emit(H), d.subshift.spec.alphabet, d.machine);
    return tile_set_build(cm.tm, H, d.subshift.spec.alphabet);
}

namespace detail {

inline std::string beta_name(const BranchSym& b) {
    return b.empty() ? std::string("empty") : std::string(mark_name(b.mark)) + std::to_string(b.bit);
}

inline BranchSym beta_parse(const std::string& s) {
    if (s == "empty") return {};
    if (s.size() != 2 || (s[1] != '0' && s[1] != '1')) throw FormatError("bad branch symbol '" + s + "'");
    return {parse_mark(s.substr(0, 1)), s[1] - '0'};
}

inline std::string comm_name(const Group& H, int c) { return c == kDelete ? std::string("D") : H.generator_name(c); }
inline int comm_parse(const Group& H, const std::string& s) { return s == "D" ? kDelete : H.generator_index(s); }

struct LayerCodec {
    const Group& H;
    const Alphabet& A;
    const TileSet& ts;
    std::vector<std::string> keys;

    Json value(const LayerCell& c, Layer l) const {
        switch (l) {
            case Layer::alpha:
                if (*c.alpha < 0 || static_cast<std::size_t>(*c.alpha) >= A.size()) return *c.alpha;
                return A[static_cast<std::size_t>(*c.alpha)];
            case Layer::delta: return {H.generator_name(c.delta->l), H.generator_name(c.delta->r)};
            case Layer::beta: return beta_name(*c.beta);
            case Layer::gamma:
                if (*c.gamma < 0) return "empty";
                if (static_cast<std::size_t>(*c.gamma) >= keys.size()) return *c.gamma;
                return keys[static_cast<std::size_t>(*c.gamma)];
            case Layer::tau: {
                if (c.tau->empty) return "empty";
                const auto& t = *c.tau;
                return {{"bit", t.bit},
                        {"prev", H.generator_name(t.prev)},
                        {"next", H.generator_name(t.next)},
                        {"symb", A[static_cast<std::size_t>(t.symb)]},
                        {"comm", comm_name(H, t.comm)}};
            }
        }
        return {};
    }

    void set(LayerCell& c, Layer l, const Json& v) const {
        if (v.is_null()) {
            clear_layer(c, l);
            return;
        }
        switch (l) {
            case Layer::alpha: c.alpha = v.is_number() ? v.get<int>() : A.index(v.get<std::string>()); break;
            case Layer::delta:
                if (!v.is_array() || v.size() != 2) throw FormatError("delta must be [left, right]");
                c.delta = DirectionSym{H.generator_index(v[0].get<std::string>()), H.generator_index(v[1].get<std::string>())};
                break;
            case Layer::beta: c.beta = beta_parse(v.get<std::string>()); break;
            case Layer::gamma:
                if (v.is_number())
                    c.gamma = v.get<int>();
                else if (v.get<std::string>() == "empty")
                    c.gamma = -1;
                else
                    c.gamma = ts.at(v.get<std::string>());
                break;
            case Layer::tau:
                if (v.is_string()) {
                    if (v.get<std::string>() != "empty") throw FormatError("tentacle symbol must be an object or \"empty\"");
                    c.tau = TentacleSym{};
                } else {
                    TentacleSym t;
                    t.empty = false;
                    t.bit = get_as<int>(v, "bit");
                    t.prev = H.generator_index(get_as<std::string>(v, "prev"));
                    t.next = H.generator_index(get_as<std::string>(v, "next"));
                    t.symb = A.index(get_as<std::string>(v, "symb"));
                    t.comm = comm_parse(H, get_as<std::string>(v, "comm"));
                    c.tau = t;
                }
                break;
        }
    }
};

constexpr Layer kLayers[] = {Layer::alpha, Layer::delta, Layer::beta, Layer::gamma, Layer::tau};

inline std::string word_name(std::size_t w) { return format_bits(index_to_word(w)); }

}  // namespace detail

/// Cells inherit from "default" then "columns"; "cells" overrides per (h, w), null meaning unset.
inline Json layered_to_json(const LayeredDoc& d, const TileSet& ts) {
    const auto& p = *d.patch;
    const auto& H = p.group();
    detail::LayerCodec codec{H, d.subshift.spec.alphabet, ts, tile_keys(ts)};
    Json out;
    out["subshift"] = subshift_to_json(d.subshift);
    if (d.machine.wait_override) out["machine"] = {{"wait_override", *d.machine.wait_override}};
    out["radius"] = p.radius();
    out["depth"] = p.depth();
    out["default"] = {{"beta", "empty"}, {"gamma", "empty"}, {"tau", "empty"}};
    LayerCell base;
    base.beta = BranchSym{};
    base.gamma = -1;
    base.tau = TentacleSym{};

    Json columns = Json::array(), cells = Json::array();
    for (std::size_t e = 0; e < p.elements(); ++e) {
        LayerCell inherit = base;
        Json col{{"h", H.format_element(p.element(e))}};
        const auto& root = p.cell(e, 0);
        for (Layer l : {Layer::alpha, Layer::delta}) {
            if (!layer_set(root, l)) continue;
            codec.set(inherit, l, codec.value(root, l));
            col[layer_name(l)] = codec.value(root, l);
        }
        if (col.size() > 1) columns.push_back(col);
        for (std::size_t w = 0; w < p.words(); ++w) {
            const auto& c = p.cell(e, w);
            Json o;
            for (Layer l : detail::kLayers) {
                bool have = layer_set(c, l), had = layer_set(inherit, l);
                if (!have && !had) continue;
                if (!have) {
                    o[layer_name(l)] = nullptr;
                    continue;
                }
                auto v = codec.value(c, l);
                if (!had || v != codec.value(inherit, l)) o[layer_name(l)] = v;
            }
            if (o.is_null()) continue;
            o["h"] = H.format_element(p.element(e));
            o["w"] = detail::word_name(w);
            cells.push_back(o);
        }
    }
    out["columns"] = columns;
    out["cells"] = cells;
    return out;
}

inline std::pair<LayeredDoc, TileSet> layered_from_json(const Json& j) {
    LayeredDoc d;
    d.subshift = subshift_from_json(j.at("subshift"));
    if (j.contains("machine") && j.at("machine").contains("wait_override"))
        d.machine.wait_override = j.at("machine").at("wait_override").get<std::int64_t>();
    auto ts = layered_tiles(d);
    const auto& H = d.subshift.group;
    LayeredPatch p(H, detail::get_as<std::int64_t>(j, "radius"), detail::get_as<int>(j, "depth"));
    detail::LayerCodec codec{H, d.subshift.spec.alphabet, ts, tile_keys(ts)};
    auto apply = [&](LayerCell& c, const Json& o) {
        for (Layer l : detail::kLayers)
            if (o.contains(layer_name(l))) codec.set(c, l, o.at(layer_name(l)));
    };
    auto locate = [&](const Json& o) {
        auto i = p.element_index(element_from_json(H, o.at("h")));
        if (i < 0) throw FormatError("element " + o.at("h").dump() + " outside the patch support");
        return static_cast<std::size_t>(i);
    };
    if (j.contains("default"))
        for (std::size_t e = 0; e < p.elements(); ++e)
            for (std::size_t w = 0; w < p.words(); ++w) apply(p.cell(e, w), j.at("default"));
    if (j.contains("columns"))
        for (const auto& o : j.at("columns")) {
            auto e = locate(o);
            for (std::size_t w = 0; w < p.words(); ++w) apply(p.cell(e, w), o);
        }
    if (j.contains("cells"))
        for (const auto& o : j.at("cells")) {
            auto e = locate(o);
            auto w = word_to_index(parse_bits(detail::get_as<std::string>(o, "w")));
            if (w >= p.words()) throw FormatError("word deeper than the patch");
            apply(p.cell(e, w), o);
        }
    d.patch = std::move(p);
    return {std::move(d), std::move(ts)};
}

inline Json layer_report_json(const LayeredPatch& p, const std::vector<LayerViolation>& v) {
    Json arr = Json::array();
    for (const auto& x : v)
        arr.push_back({{"rule", x.rule},
                       {"h", p.group().format_element(p.element(x.element))},
                       {"w", detail::word_name(x.word)},
                       {"detail", x.detail}});
    Json summary = Json::object();
    for (const auto& [fam, n] : rule_family_counts(v)) summary[fam] = n;
    return {{"valid", v.empty()}, {"violations", arr}, {"summary", summary}};
}

// ---------------------------------------------------------------------------
// Certificates.

inline Json big_to_json(const BigInt& v) {
    auto s = v.str();
    if (s.size() > 10000) return Json{{"digits", s.size()}};
    return s;
}

inline Json certificate_to_json(const Certificate& c) {
    return {{"cover_size", c.cover_size},
            {"T", c.T},
            {"dT", c.dT},
            {"U", c.U},
            {"dU", c.dU},
            {"d_TxU", c.dTU},
            {"lhs", {{"base", 2}, {"exponent", c.T * c.U}, {"value", big_to_json(c.lhs)}}},
            {"rhs", {{"base", c.cover_size}, {"exponent", c.dTU}, {"value", big_to_json(c.rhs)}}},
            {"valid", c.valid}};
}

// ---------------------------------------------------------------------------
// Toeplitz words and coupling patches.

inline Json toeplitz_to_json(const ToeplitzWord& w) {
    Json cells = Json::array();
    for (int v : w.cells) cells.push_back(v == kDollar ? std::string("$") : std::to_string(v));
    return {{"lo", w.lo}, {"hi", w.hi}, {"cells", cells}};
}

inline ToeplitzWord toeplitz_from_json(const Json& j) {
    ToeplitzWord w;
    w.lo = detail::get_as<std::int64_t>(j, "lo");
    w.hi = detail::get_as<std::int64_t>(j, "hi");
    for (const auto& c : j.at("cells")) {
        auto s = c.get<std::string>();
        if (s == "$")
            w.cells.push_back(kDollar);
        else
            try {
                w.cells.push_back(std::stoi(s));
            } catch (const std::exception&) {
                throw FormatError("bad Toeplitz cell '" + s + "'");
            }
    }
    if (static_cast<std::int64_t>(w.cells.size()) != w.hi - w.lo + 1) throw FormatError("cell count does not match range");
    return w;
}

inline Json wpatch_to_json(const WPatch& p) {
    Json S = Json::array();
    for (int s : p.S) S.push_back(p.N.generator_name(s));
    Json cells = Json::array();
    for (const auto& [key, c] : p.cells) {
        Json o{{"h", p.H.format_element(key.first)},
               {"n", p.N.format_element(key.second)},
               {"d", {p.H.generator_name(c.d.first), p.H.generator_name(c.d.second)}}};
        o["y"] = c.y ? Json(*c.y) : Json("$");
        cells.push_back(o);
    }
    return {{"H", group_to_json(p.H)}, {"N", group_to_json(p.N)}, {"S", S}, {"cells", cells}};
}

inline WPatch wpatch_from_json(const Json& j) {
    WPatch p{group_from_json(j.at("H")), group_from_json(j.at("N")), {}, {}};
    for (const auto& s : j.at("S")) p.S.push_back(p.N.generator_index(s.get<std::string>()));
    for (const auto& o : j.at("cells")) {
        WCell c;
        const auto& d = o.at("d");
        c.d = {p.H.generator_index(d.at(0).get<std::string>()), p.H.generator_index(d.at(1).get<std::string>())};
        if (!(o.at("y").is_string() && o.at("y").get<std::string>() == "$")) c.y = o.at("y").get<std::vector<int>>();
        p.cells[{element_from_json(p.H, o.at("h")), element_from_json(p.N, o.at("n"))}] = std::move(c);
    }
    return p;
}

inline Json wviolations_to_json(const WPatch& p, const std::vector<WViolation>& v) {
    Json arr = Json::array();
    for (const auto& x : v)
        arr.push_back({{"rule", x.rule},
                       {"h", p.H.format_element(x.h)},
                       {"n", p.N.format_element(x.n)},
                       {"s", p.N.generator_name(x.s)}});
    return arr;
}

}  // namespace forge
