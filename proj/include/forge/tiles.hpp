#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/group.hpp"
#include "forge/subshift.hpp"
#include "forge/turing.hpp"

namespace forge {

// Branching-layer marks. `empty` is the placeholder symbol.
enum class Mark { empty, seed, left, mid, right };

inline const char* mark_name(Mark m) {
    switch (m) {
        case Mark::empty: return "empty";
        case Mark::seed: return "S";
        case Mark::left: return "L";
        case Mark::mid: return "M";
        case Mark::right: return "R";
    }
    return "?";
}

inline Mark parse_mark(const std::string& s) {
    if (s == "S") return Mark::seed;
    if (s == "L") return Mark::left;
    if (s == "M") return Mark::mid;
    if (s == "R") return Mark::right;
    if (s == "empty") return Mark::empty;
    throw SpecError("unknown branching mark '" + s + "'");
}

struct WangTile {
    std::string name;
    std::string top, bottom, left, right;  // "" is the empty edge
    Mark mark = Mark::mid;
    bool squid = false;
    std::optional<int> command;      // command-left tiles: code announced to the tentacle
    std::optional<int> read_symbol;  // conditional transition tiles: middle symbol
    bool final = false;              // some edge mentions the final state
};

class TileSet {
public:
    std::vector<WangTile> tiles;
    std::map<std::string, int> by_key;
    TuringMachine machine;  // machine after interface completion
    Alphabet alphabet;
    std::map<int, std::string> command_names;

    int add(const std::string& key, WangTile t) {
        if (by_key.count(key)) throw SpecError("duplicate tile key " + key);
        tiles.push_back(std::move(t));
        by_key[key] = static_cast<int>(tiles.size()) - 1;
        return static_cast<int>(tiles.size()) - 1;
    }
    int find(const std::string& key) const {
        auto it = by_key.find(key);
        return it == by_key.end() ? -1 : it->second;
    }
    int at(const std::string& key) const {
        int i = find(key);
        if (i < 0) throw DomainError("no tile for " + key);
        return i;
    }
    const WangTile& operator[](int i) const { return tiles.at(static_cast<std::size_t>(i)); }
    // Including the placeholder tile.
    std::size_t count() const { return tiles.size() + 1; }
};

namespace detail {

inline std::string head_color(const TuringMachine& tm, int q, int s) {
    return "h:" + tm.states[static_cast<std::size_t>(q)] + "|" + tm.symbols[static_cast<std::size_t>(s)];
}
inline std::string sym_color(const TuringMachine& tm, int s) { return "s:" + tm.symbols[static_cast<std::size_t>(s)]; }

}  // namespace detail

/// Compile a machine into the computation-layer tile set over the alphabet A.
inline TileSet tile_set_build(const TuringMachine& input, const Group& H, const Alphabet& A) {
    TileSet ts;
    ts.machine = input;
    auto& tm = ts.machine;
    std::vector<std::pair<int, std::string>> cmds;
    for (int s = 0; s < H.num_generators(); ++s) cmds.emplace_back(s, H.generator_name(s));
    cmds.emplace_back(kDelete, "D");
    tm.ensure_interface(cmds, A.size(), A.symbols);
    tm.validate();

    auto cmd_name = [&](int c) { return c == kDelete ? std::string("D") : H.generator_name(c); };
    ts.alphabet = A;
    for (const auto& [code, qq] : tm.command) ts.command_names[code] = cmd_name(code);
    auto mk = [](std::string name, std::string b, std::string t, std::string l, std::string r, Mark m) {
        WangTile w;
        w.name = std::move(name);
        w.bottom = std::move(b);
        w.top = std::move(t);
        w.left = std::move(l);
        w.right = std::move(r);
        w.mark = m;
        return w;
    };
    const std::string x = "x";

    auto seed = mk("seed", "", "seed", "", "", Mark::seed);
    seed.squid = true;
    ts.add("seed", seed);
    auto seedL = mk("seed_L", "seed", "border", "", "sl", Mark::left);
    seedL.squid = true;
    ts.add("seed_L", seedL);
    ts.add("seed_R", mk("seed_R", "", "mid", "sl", "", Mark::right));
    auto left = mk("Left", "border", "border", "", x, Mark::left);
    left.squid = true;
    ts.add("Left", left);
    ts.add("Mid", mk("Mid", "mid", "org", x, x, Mark::mid));
    ts.add("Right", mk("Right", "", "new", x, "", Mark::right));
    ts.add("Origin", mk("Origin", "org", detail::head_color(tm, tm.q0, 0), x, x, Mark::mid));
    ts.add("Blank", mk("Blank", "new", detail::sym_color(tm, 0), x, x, Mark::mid));

    for (std::size_t s = 0; s < tm.symbols.size(); ++s) {
        auto c = detail::sym_color(tm, static_cast<int>(s));
        ts.add("transmit|" + tm.symbols[s], mk("transmit(" + tm.symbols[s] + ")", c, c, x, x, Mark::mid));
    }

    std::map<int, int> command_state_code;
    for (const auto& [code, qq] : tm.command) command_state_code[qq.first] = code;

    for (const auto& [key, act] : tm.delta) {
        auto [q, s] = key;
        auto cs = command_state_code.find(q);
        if (cs != command_state_code.end() && s == 0) {
            // A^old: replaced by the command pair below.
            continue;
        }
        std::string qn = tm.states[static_cast<std::size_t>(q)];
        std::string sn = tm.symbols[static_cast<std::size_t>(s)];
        std::string tag = qn + "|" + sn;
        auto bottom = detail::head_color(tm, q, s);
        if (act.move == 0) {
            ts.add("up|" + tag, mk("stateup(" + tag + ")", bottom, detail::head_color(tm, act.state, act.write), x, x,
                                   Mark::mid));
        } else if (act.move > 0) {
            ts.add("right|" + tag, mk("stateright(" + tag + ")", bottom, detail::sym_color(tm, act.write), x,
                                      "r:" + tm.states[static_cast<std::size_t>(act.state)], Mark::mid));
        } else {
            ts.add("left|" + tag, mk("stateleft(" + tag + ")", bottom, detail::sym_color(tm, act.write),
                                     "l:" + tm.states[static_cast<std::size_t>(act.state)], x, Mark::mid));
        }
    }
    for (std::size_t q = 0; q < tm.states.size(); ++q)
        for (std::size_t s = 0; s < tm.symbols.size(); ++s) {
            std::string tag = tm.states[q] + "|" + tm.symbols[s];
            auto top = detail::head_color(tm, static_cast<int>(q), static_cast<int>(s));
            auto bot = detail::sym_color(tm, static_cast<int>(s));
            ts.add("inL|" + tag, mk("incomingleft(" + tag + ")", bot, top, "r:" + tm.states[q], x, Mark::mid));
            ts.add("inR|" + tag, mk("incomingright(" + tag + ")", bot, top, x, "l:" + tm.states[q], Mark::mid));
        }
    for (const auto& [code, qq] : tm.command) {
        std::string cn = cmd_name(code);
        auto cl = mk("command-left(" + cn + ")", "border", "border", "", "cmd:" + cn, Mark::left);
        cl.squid = true;
        cl.command = code;
        ts.add("cmdL|" + cn, cl);
        ts.add("cmdR|" + cn, mk("command-right(" + cn + ")", detail::head_color(tm, qq.first, 0),
                                detail::head_color(tm, qq.second, 0), "cmd:" + cn, x, Mark::mid));
    }
    for (const auto& [a, q] : tm.read) {
        for (std::size_t c = 0; c < A.size(); ++c) {
            std::string tag = A[static_cast<std::size_t>(a)] + "|" + A[c];
            auto t = mk("read(" + tag + ")", detail::head_color(tm, q, 0),
                        detail::head_color(tm, static_cast<int>(c) == a ? tm.yes : tm.no, 0), x, x, Mark::mid);
            t.read_symbol = static_cast<int>(c);
            ts.add("read|" + tag, t);
        }
    }
    if (tm.qF >= 0) {
        std::string needle = tm.states[static_cast<std::size_t>(tm.qF)];
        auto mentions = [&](const std::string& e) {
            for (const auto& pre : {std::string("h:"), std::string("r:"), std::string("l:")}) {
                if (e.rfind(pre, 0) == 0) {
                    auto body = e.substr(2);
                    auto bar = body.find('|');
                    if (body.substr(0, bar) == needle) return true;
                }
            }
            return false;
        };
        for (auto& t : ts.tiles) t.final = mentions(t.top) || mentions(t.bottom) || mentions(t.left) || mentions(t.right);
    }
    return ts;
}

/// Expected count: |A0| + 2(|S|+1) + |A|^2 - (|S|+1) + 1.
inline std::size_t expected_tile_count(const TuringMachine& tm_augmented, std::size_t S, std::size_t A) {
    std::size_t nonconditional = tm_augmented.delta.size();
    std::size_t a0 = 8 + tm_augmented.symbols.size() + nonconditional +
                     2 * tm_augmented.states.size() * tm_augmented.symbols.size();
    return a0 + 2 * (S + 1) + A * A - (S + 1) + 1;
}

/// Tile rows of one computation zone, levels 0..depth, laid by forward simulation.
inline std::vector<std::vector<int>> lay_zone(const TileSet& ts, const MachineRun& run, int depth) {
    const auto& tm = ts.machine;
    std::vector<std::vector<int>> rows;
    for (int n = 0; n <= depth; ++n) {
        std::vector<int> row;
        if (n == 0) {
            row = {ts.at("seed")};
        } else if (n == 1) {
            row = {ts.at("seed_L"), ts.at("seed_R")};
        } else if (n == 2) {
            row = {ts.at("Left"), ts.at("Mid"), ts.at("Right")};
        } else if (n == 3) {
            row = {ts.at("Left"), ts.at("Origin"), ts.at("Blank"), ts.at("Right")};
        } else {
            auto k = static_cast<std::size_t>(n - 4);
            if (k >= run.steps.size()) throw DomainError("machine halted before level " + std::to_string(n));
            const auto& st = run.steps[k];
            const auto& c = st.before;
            auto tape_len = static_cast<std::size_t>(n - 2);
            std::vector<int> tape(tape_len, 0);
            for (std::size_t t = 0; t < tape_len && t < c.tape.size(); ++t) tape[t] = c.tape[t];
            if (c.head >= static_cast<int>(tape_len)) throw DomainError("head left the computation zone");
            row.push_back(ts.at(st.command ? "cmdL|" + ts.command_names.at(*st.command) : std::string("Left")));
            for (std::size_t t = 0; t < tape_len; ++t) {
                std::string sym = tm.symbols[static_cast<std::size_t>(tape[t])];
                auto ti = static_cast<int>(t);
                std::string key;
                if (ti == c.head) {
                    std::string tag = tm.states[static_cast<std::size_t>(c.state)] + "|" + sym;
                    if (st.conditional)
                        key = "read|" + ts.alphabet[static_cast<std::size_t>(tm.read_target(c.state))] + "|" +
                              ts.alphabet[static_cast<std::size_t>(st.read_symbol)];
                    else if (st.command)
                        key = "cmdR|" + ts.command_names.at(*st.command);
                    else if (st.action.move == 0)
                        key = "up|" + tag;
                    else if (st.action.move > 0)
                        key = "right|" + tag;
                    else
                        key = "left|" + tag;
                } else if (st.action.move != 0 && ti == c.head + st.action.move) {
                    std::string tag = tm.states[static_cast<std::size_t>(st.action.state)] + "|" + sym;
                    key = (st.action.move > 0 ? "inL|" : "inR|") + tag;
                } else {
                    key = "transmit|" + sym;
                }
                row.push_back(ts.at(key));
            }
            row.push_back(ts.at("Blank"));
            row.push_back(ts.at("Right"));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Number of rows of width n+1 compatible with the tops of `below` (n cells),
/// counted by dynamic programming over left-edge colors.
inline std::size_t count_row_completions(const TileSet& ts, const std::vector<int>& below, int n) {
    auto width = static_cast<std::size_t>(n) + 1;
    std::map<std::string, std::size_t> frontier{{"", 1}};
    for (std::size_t j = 0; j < width; ++j) {
        Mark want = n == 0 ? Mark::seed : j == 0 ? Mark::left : j + 1 == width ? Mark::right : Mark::mid;
        std::map<std::string, std::size_t> next;
        for (const auto& t : ts.tiles) {
            if (t.mark != want) continue;
            if (j < below.size()) {
                if (t.bottom != ts[below[j]].top) continue;
            } else if (n == 0 && !t.bottom.empty()) {
                continue;
            }
            auto it = frontier.find(t.left);
            if (it == frontier.end()) continue;
            next[t.right] += it->second;
        }
        frontier = std::move(next);
    }
    auto it = frontier.find("");
    return it == frontier.end() ? 0 : it->second;
}

inline std::string tiles_to_dot(const TileSet& ts) {
    std::ostringstream out;
    out << "digraph tiles {\n  node [shape=record, fontname=\"monospace\"];\n";
    for (std::size_t i = 0; i < ts.tiles.size(); ++i) {
        const auto& t = ts.tiles[i];
        auto esc = [](const std::string& s) {
            std::string r;
            for (char c : s) {
                if (c == '|' || c == '{' || c == '}' || c == '<' || c == '>' || c == '"' || c == '\\') r += '\\';
                r += c;
            }
            return r;
        };
        out << "  t" << i << " [label=\"{" << esc(t.top) << "|{" << esc(t.left) << "|" << esc(t.name) << "|"
            << esc(t.right) << "}|" << esc(t.bottom) << "}\"];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace forge
