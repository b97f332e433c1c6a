#pragma once

#include <climits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forge/errors.hpp"
#include "forge/group.hpp"
#include "forge/subshift.hpp"

namespace forge {

// Tentacle commands: a generator index s >= 0 means "grow along s", kDelete means "delete".
constexpr int kDelete = -1;

struct Action {
    int state = 0;
    int write = 0;
    int move = 0;  // -1, 0, +1

    bool operator==(const Action& o) const { return state == o.state && write == o.write && move == o.move; }
};

struct MachineConfig {
    int state = 0;
    int head = 0;
    std::vector<int> tape;  // grows on demand, blank is 0

    int read() const { return head < static_cast<int>(tape.size()) ? tape[static_cast<std::size_t>(head)] : 0; }
};

struct StepInfo {
    MachineConfig before;
    MachineConfig after;
    Action action;
    bool conditional = false;
    int read_symbol = -1;          // alphabet symbol consumed by a conditional step
    std::optional<int> command;    // set on a command step
};

class TuringMachine {
public:
    std::vector<std::string> states;
    std::vector<std::string> symbols{"_"};  // index 0 is the blank
    int q0 = 0;
    int qF = -1;
    std::map<std::pair<int, int>, Action> delta;

    std::map<int, std::pair<int, int>> command;  // code -> (q_c, q'_c)
    std::map<int, int> read;                     // alphabet symbol -> q^a
    int yes = -1;
    int no = -1;

    int find_state(const std::string& name) const {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i] == name) return static_cast<int>(i);
        return -1;
    }
    int state_index(const std::string& name) const {
        int i = find_state(name);
        if (i < 0) throw SpecError("unknown state '" + name + "'");
        return i;
    }
    int add_state(const std::string& name) {
        int i = find_state(name);
        if (i >= 0) return i;
        states.push_back(name);
        return static_cast<int>(states.size()) - 1;
    }
    int find_symbol(const std::string& name) const {
        for (std::size_t i = 0; i < symbols.size(); ++i)
            if (symbols[i] == name) return static_cast<int>(i);
        return -1;
    }
    int symbol_index(const std::string& name) const {
        int i = find_symbol(name);
        if (i < 0) throw SpecError("unknown tape symbol '" + name + "'");
        return i;
    }
    int add_symbol(const std::string& name) {
        int i = find_symbol(name);
        if (i >= 0) return i;
        symbols.push_back(name);
        return static_cast<int>(symbols.size()) - 1;
    }

    void set(int q, int sigma, Action a) { delta[{q, sigma}] = a; }

    // Alphabet symbol a if q is the conditional state q^a, else -1.
    int read_target(int q) const {
        for (const auto& [a, s] : read)
            if (s == q) return a;
        return -1;
    }
    std::optional<int> command_of(int q) const {
        for (const auto& [c, qq] : command)
            if (qq.first == q) return c;
        return std::nullopt;
    }
    bool is_command_transition(int q, int sigma) const {
        auto c = command_of(q);
        if (!c || sigma != 0) return false;
        auto it = delta.find({q, sigma});
        return it != delta.end() && it->second == Action{command.at(*c).second, 0, 0};
    }

    /// Add the special command and read states that are missing.
    void ensure_interface(const std::vector<std::pair<int, std::string>>& commands, std::size_t alphabet_size,
                          const std::vector<std::string>& alphabet_names = {}) {
        for (const auto& [code, name] : commands) {
            if (command.count(code)) continue;
            std::string base = code == kDelete ? std::string("del") : "grow:" + name;
            std::string primed = code == kDelete ? std::string("del'") : "grow':" + name;
            int q = add_state(base);
            int qp = add_state(primed);
            command[code] = {q, qp};
            set(q, 0, {qp, 0, 0});
        }
        if (yes < 0) yes = add_state("yes");
        if (no < 0) no = add_state("no");
        for (std::size_t a = 0; a < alphabet_size; ++a) {
            if (read.count(static_cast<int>(a))) continue;
            std::string nm = a < alphabet_names.size() ? alphabet_names[a] : std::to_string(a);
            read[static_cast<int>(a)] = add_state("read:" + nm);
        }
    }

    void validate() const {
        auto nq = static_cast<int>(states.size());
        auto ns = static_cast<int>(symbols.size());
        if (nq == 0) throw SpecError("machine has no states");
        if (symbols.empty()) throw SpecError("machine has no tape symbols");
        if (q0 < 0 || q0 >= nq) throw SpecError("initial state out of range");
        if (qF >= nq) throw SpecError("final state out of range");
        for (const auto& [key, a] : delta) {
            if (key.first < 0 || key.first >= nq || key.second < 0 || key.second >= ns)
                throw SpecError("transition key out of range");
            if (a.state < 0 || a.state >= nq || a.write < 0 || a.write >= ns)
                throw SpecError("transition target out of range");
            if (a.move < -1 || a.move > 1) throw SpecError("head move must be -1, 0 or +1");
        }
        for (const auto& [c, qq] : command) {
            auto it = delta.find({qq.first, 0});
            if (it == delta.end() || !(it->second == Action{qq.second, 0, 0}))
                throw SpecError("command state " + states[static_cast<std::size_t>(qq.first)] +
                                " must step to its primed state in place on a blank");
        }
        for (const auto& [a, q] : read) {
            for (int s = 0; s < ns; ++s)
                if (delta.count({q, s}))
                    throw SpecError("conditional state " + states[static_cast<std::size_t>(q)] +
                                    " may not have ordinary transitions");
        }
        if (!read.empty() && (yes < 0 || no < 0)) throw SpecError("conditional states need yes/no targets");
    }

    /// One step; nullopt when the machine halts (no transition).
    std::optional<StepInfo> step(const MachineConfig& c, int read_symbol = -1) const {
        StepInfo info;
        info.before = c;
        int sigma = c.read();
        Action act;
        int a = read_target(c.state);
        if (a >= 0) {
            if (sigma != 0) throw DomainError("conditional transition away from a blank cell");
            if (read_symbol < 0) throw DomainError("conditional transition without a symbol to read");
            act = {read_symbol == a ? yes : no, 0, 0};
            info.conditional = true;
            info.read_symbol = read_symbol;
        } else {
            auto it = delta.find({c.state, sigma});
            if (it == delta.end()) return std::nullopt;
            act = it->second;
            if (is_command_transition(c.state, sigma)) info.command = command_of(c.state);
        }
        info.action = act;
        MachineConfig n = c;
        if (n.head >= static_cast<int>(n.tape.size())) n.tape.resize(static_cast<std::size_t>(n.head) + 1, 0);
        n.tape[static_cast<std::size_t>(n.head)] = act.write;
        n.state = act.state;
        n.head += act.move;
        if (n.head < 0) throw DomainError("head moved left of the origin");
        info.after = std::move(n);
        return info;
    }
};

inline std::int64_t ceil_log2(std::int64_t v) {
    std::int64_t k = 0;
    std::int64_t p = 1;
    while (p < v) {
        p *= 2;
        ++k;
    }
    return k;
}

/// 2(|S|^{2m+1}-1)/(|S|-1) + ceil(log2((|S|^{2m+1}-1)/(|S|-1))) + 1
inline std::int64_t wait_steps(std::int64_t S, std::int64_t m) {
    if (S < 2) throw DomainError("generating set needs at least two elements");
    if (m < 0) throw DomainError("negative word length");
    std::int64_t geometric = 0;  // 1 + S + ... + S^{2m}
    std::int64_t term = 1;
    for (std::int64_t k = 0; k <= 2 * m; ++k) {
        if (geometric > (LLONG_MAX / 4) - term) throw BudgetError("wait bound overflows");
        geometric += term;
        if (k < 2 * m) {
            if (term > LLONG_MAX / (4 * S)) throw BudgetError("wait bound overflows");
            term *= S;
        }
    }
    return 2 * geometric + ceil_log2(geometric) + 1;
}

struct MachineOptions {
    // Replaces the wait formula; for desk-scale experiments with growing tentacles.
    std::optional<std::int64_t> wait_override;
};

struct CompiledMachine {
    TuringMachine tm;
    bool dispatch = false;
    std::size_t sites = 0;
    std::vector<std::vector<std::int64_t>> waits;  // per coding, per entry
};

namespace detail {

struct Site {
    enum Kind { grow, read, del } kind;
    int letter = 0;             // for grow
    std::size_t coding = 0;
    std::size_t entry = 0;
    bool last_entry = false;
};

}  // namespace detail

/// Compile a finite coding list into a machine running the detection loop.
inline CompiledMachine machine_build(const Group& H, const std::vector<PatternCoding>& codings, const Alphabet& A,
                                     const MachineOptions& opt = {}) {
    CompiledMachine out;
    auto& tm = out.tm;
    tm.states.clear();
    tm.q0 = tm.add_state("q0");
    tm.qF = tm.add_state("qF");
    int idle = tm.add_state("idle");

    std::vector<std::pair<int, std::string>> cmds;
    for (int s = 0; s < H.num_generators(); ++s) cmds.emplace_back(s, H.generator_name(s));
    cmds.emplace_back(kDelete, "D");
    tm.ensure_interface(cmds, A.size(), A.symbols);

    std::vector<PatternCoding> geo;
    for (const auto& c : codings) {
        for (const auto& [w, a] : c.entries)
            if (a < 0 || static_cast<std::size_t>(a) >= A.size()) throw SpecError("coding symbol outside alphabet");
        geo.push_back(geodesic_coding(H, c));
    }

    std::vector<detail::Site> sites;
    for (std::size_t ci = 0; ci < geo.size(); ++ci) {
        const auto& ent = geo[ci].entries;
        out.waits.emplace_back();
        for (std::size_t ei = 0; ei < ent.size(); ++ei) {
            auto m = static_cast<std::int64_t>(ent[ei].first.size());
            out.waits.back().push_back(opt.wait_override ? *opt.wait_override
                                                         : wait_steps(H.num_generators(), m));
            bool last = ei + 1 == ent.size();
            for (int s : ent[ei].first) sites.push_back({detail::Site::grow, s, ci, ei, last});
            sites.push_back({detail::Site::read, 0, ci, ei, last});
            sites.push_back({detail::Site::del, 0, ci, ei, last});
        }
    }
    out.sites = sites.size();

    std::map<int, int> grow_uses;
    std::size_t reads = 0, dels = 0;
    for (const auto& s : sites) {
        if (s.kind == detail::Site::grow) ++grow_uses[s.letter];
        if (s.kind == detail::Site::read) ++reads;
        if (s.kind == detail::Site::del) ++dels;
    }
    bool dispatch = reads > 1 || dels > 1;
    for (const auto& [l, n] : grow_uses) dispatch = dispatch || n > 1;
    out.dispatch = dispatch;

    auto pc = [&](std::size_t site, int d) {
        return tm.add_symbol("P" + std::to_string(site) + "." + std::to_string(d));
    };
    if (dispatch)
        for (std::size_t i = 0; i < sites.size(); ++i) {
            pc(i, 0);
            pc(i, 1);
        }

    // State entered to start coding ci at entry 0 (wait landing), or qF for an empty coding.
    std::map<std::pair<std::size_t, std::size_t>, int> landing;
    auto landing_state = [&](std::size_t ci, std::size_t ei) -> int {
        if (ci >= geo.size()) return idle;
        if (geo[ci].entries.empty()) return tm.qF;
        auto key = std::make_pair(ci, ei);
        auto it = landing.find(key);
        if (it != landing.end()) return it->second;
        int s = (ci == 0 && ei == 0) ? tm.q0 : tm.add_state("wait:" + std::to_string(ci) + "." + std::to_string(ei) + ".0");
        landing[key] = s;
        return s;
    };
    auto entry_state = [&](const detail::Site& s) -> int {
        if (s.kind == detail::Site::grow) return tm.command.at(s.letter).first;
        if (s.kind == detail::Site::read) return tm.read.at(geo[s.coding].entries[s.entry].second);
        return tm.command.at(kDelete).first;
    };
    // Where control goes once site i has finished.
    auto after_site = [&](std::size_t i) -> int {
        if (i + 1 < sites.size()) {
            const auto& nx = sites[i + 1];
            if (nx.coding != sites[i].coding || nx.entry != sites[i].entry) return landing_state(nx.coding, nx.entry);
            return entry_state(nx);
        }
        return landing_state(sites[i].coding + 1, 0);
    };
    auto next_coding_is_empty_chain = [&](std::size_t ci) {
        // landing_state already resolves empty codings to qF.
        return landing_state(ci, 0);
    };
    (void)next_coding_is_empty_chain;

    // Wait chains: landing -> ... -> first site of the entry, exactly W steps.
    std::size_t site_cursor = 0;
    bool first_chain = true;
    for (std::size_t ci = 0; ci < geo.size(); ++ci) {
        if (geo[ci].entries.empty()) continue;
        for (std::size_t ei = 0; ei < geo[ci].entries.size(); ++ei) {
            while (site_cursor < sites.size() && (sites[site_cursor].coding != ci || sites[site_cursor].entry != ei))
                ++site_cursor;
            std::int64_t W = std::max<std::int64_t>(out.waits[ci][ei], dispatch && first_chain ? 2 : 1);
            int cur = landing_state(ci, ei);
            std::string stem = "wait:" + std::to_string(ci) + "." + std::to_string(ei) + ".";
            for (std::int64_t k = 1; k <= W; ++k) {
                int nxt = k == W ? entry_state(sites[site_cursor]) : tm.add_state(stem + std::to_string(k));
                if (dispatch && first_chain && k == 1)
                    tm.set(cur, 0, {nxt, 0, +1});
                else if (dispatch && first_chain && k == 2)
                    tm.set(cur, 0, {nxt, pc(0, 1), -1});
                else
                    tm.set(cur, 0, {nxt, 0, 0});
                cur = nxt;
            }
            first_chain = false;
        }
    }
    if (geo.empty() || landing_state(0, 0) != tm.q0) tm.set(tm.q0, 0, {landing_state(0, 0), 0, 0});

    // Continuations out of the shared primed states.
    if (!dispatch) {
        for (std::size_t i = 0; i < sites.size(); ++i) {
            const auto& s = sites[i];
            if (s.kind == detail::Site::grow) {
                tm.set(tm.command.at(s.letter).second, 0, {after_site(i), 0, 0});
            } else if (s.kind == detail::Site::read) {
                // Only read of the program: DANGER is still 1 here.
                int del = tm.command.at(kDelete).first;
                tm.set(tm.yes, 0, {s.last_entry ? tm.qF : del, 0, 0});
                tm.set(tm.no, 0, {del, 0, 0});
            } else {
                tm.set(tm.command.at(kDelete).second, 0, {after_site(i), 0, 0});
            }
        }
    } else {
        auto disp = [&](int primed) {
            int d = tm.add_state("disp:" + tm.states[static_cast<std::size_t>(primed)]);
            tm.set(primed, 0, {d, 0, +1});
            return d;
        };
        std::map<int, int> disp_of;
        auto get_disp = [&](int primed) {
            auto it = disp_of.find(primed);
            if (it != disp_of.end()) return it->second;
            return disp_of[primed] = disp(primed);
        };
        int del = tm.command.at(kDelete).first;
        for (std::size_t i = 0; i < sites.size(); ++i) {
            const auto& s = sites[i];
            std::size_t nxt_site = i + 1;
            auto next_pc = [&](int d) { return nxt_site < sites.size() ? pc(nxt_site, d) : pc(i, d); };
            if (s.kind == detail::Site::grow) {
                int ds = get_disp(tm.command.at(s.letter).second);
                for (int d = 0; d < 2; ++d) tm.set(ds, pc(i, d), {after_site(i), next_pc(d), -1});
            } else if (s.kind == detail::Site::read) {
                int dy = get_disp(tm.yes);
                int dn = get_disp(tm.no);
                for (int d = 0; d < 2; ++d) {
                    if (s.last_entry && d == 1)
                        tm.set(dy, pc(i, d), {tm.qF, pc(i, d), -1});
                    else
                        tm.set(dy, pc(i, d), {del, next_pc(d), -1});
                    tm.set(dn, pc(i, d), {del, next_pc(0), -1});
                }
            } else {
                int dd = get_disp(tm.command.at(kDelete).second);
                bool crosses = s.last_entry;
                for (int d = 0; d < 2; ++d) tm.set(dd, pc(i, d), {after_site(i), next_pc(crosses ? 1 : d), -1});
            }
        }
    }
    tm.set(idle, 0, {idle, 0, 0});
    tm.set(tm.qF, 0, {tm.qF, 0, 0});
    tm.validate();
    return out;
}

/// Tentacle path from a base: the base element followed by one element per growth step.
struct TentaclePath {
    std::vector<Element> cells;   // base first
    std::vector<int> letters;     // letters[i] leads from cells[i] to cells[i+1]

    const Element& tip() const { return cells.back(); }

    void apply(const Group& H, int comm) {
        if (comm == kDelete) {
            cells.resize(1);
            letters.clear();
        } else if (comm != 0) {
            cells.push_back(H.mul(cells.back(), H.generator(comm)));
            letters.push_back(comm);
        }
    }
};

struct MachineRun {
    std::vector<StepInfo> steps;
    bool reached_final = false;
    bool halted = false;
};

/// Step the machine with its tentacle rooted at h; x supplies alphabet symbols.
template <class Lookup>
MachineRun run_machine(const TuringMachine& tm, const Group& H, const Element& h, Lookup&& x, std::size_t max_steps) {
    MachineRun run;
    MachineConfig c;
    c.state = tm.q0;
    TentaclePath path;
    path.cells.push_back(h);
    if (c.state == tm.qF) run.reached_final = true;
    for (std::size_t k = 0; k < max_steps; ++k) {
        int sym = tm.read_target(c.state) >= 0 ? x(path.tip()) : -1;
        auto st = tm.step(c, sym);
        if (!st) {
            run.halted = true;
            break;
        }
        if (st->command) path.apply(H, *st->command);
        c = st->after;
        run.steps.push_back(std::move(*st));
        if (c.state == tm.qF) run.reached_final = true;
    }
    return run;
}

}  // namespace forge
