#pragma once

#include <array>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "forge/rooted_sft.hpp"
#include "forge/tiles.hpp"
#include "forge/turing.hpp"

namespace forge::testing {

// Four-state machine that writes "ba" and halts, tape symbols {_, a, b}.
inline TuringMachine zigzag_machine() {
    TuringMachine tm;
    tm.states.clear();
    int q0 = tm.add_state("q0");
    int r = tm.add_state("r");
    int s = tm.add_state("s");
    int t = tm.add_state("t");
    int a = tm.add_symbol("a");
    int b = tm.add_symbol("b");
    tm.q0 = q0;
    tm.set(q0, 0, {r, a, +1});
    tm.set(r, 0, {s, b, 0});
    tm.set(s, b, {t, a, -1});
    tm.set(t, a, {s, b, +1});
    return tm;
}

struct Zigzag {
    Group H = Group::lattice(1);
    TileSet ts;
    MachineRun run;
    std::vector<std::vector<int>> rows;
    int depth = 7;
};

inline Zigzag zigzag_diagram() {
    Zigzag f;
    f.ts = tile_set_build(zigzag_machine(), f.H, Alphabet({"0", "1"}));
    f.run = run_machine(f.ts.machine, f.H, Element{0}, [](const Element&) { return 0; }, 16);
    f.rows = lay_zone(f.ts, f.run, f.depth);
    return f;
}

/// The zone rooted at 0 on branch 0^n; every other cell stays unset.
inline LayeredPatch embed_zone(const Zigzag& f) {
    LayeredPatch p(f.H, f.depth + 1, f.depth);
    DirectionSym d{2, 1};
    for (std::size_t e = 0; e < p.elements(); ++e) p.cell(e, 0).delta = d;
    std::size_t w = 0;
    for (int n = 0; n <= f.depth; ++n) {
        for (int j = 0; j <= n; ++j) {
            Mark m = n == 0 ? Mark::seed : j == 0 ? Mark::left : j == n ? Mark::right : Mark::mid;
            auto* c = p.find(Element{j}, w);
            c->beta = BranchSym{m, 0};
            c->gamma = f.rows[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
        }
        w = child_index(w, 0);
    }
    return p;
}

/// All rows of width n+1 over the tops of `below`, by plain depth-first search.
inline std::vector<std::vector<int>> enumerate_rows(const TileSet& ts, const std::vector<int>& below, int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> row;
    auto width = static_cast<std::size_t>(n) + 1;
    std::function<void()> go = [&] {
        std::size_t j = row.size();
        if (j == width) {
            if (ts[row.back()].right.empty()) out.push_back(row);
            return;
        }
        Mark want = n == 0 ? Mark::seed : j == 0 ? Mark::left : j + 1 == width ? Mark::right : Mark::mid;
        for (int i = 0; i < static_cast<int>(ts.tiles.size()); ++i) {
            const auto& t = ts[i];
            if (t.mark != want) continue;
            std::string left_wanted = j == 0 ? std::string() : ts[row.back()].right;
            if (t.left != left_wanted) continue;
            if (j < below.size() && t.bottom != ts[below[j]].top) continue;
            if (j >= below.size() && n == 0 && !t.bottom.empty()) continue;
            row.push_back(i);
            go();
            row.pop_back();
        }
    };
    go();
    return out;
}

inline std::vector<PatternCoding> forbid_one() { return {PatternCoding{{{Word{}, 1}}}}; }

inline Witness criterion4_witness(bool one_at_origin, std::int64_t radius = 8, int depth = 8) {
    Group Z = Group::lattice(1);
    ConfigPatch x;
    x.radius = 0;
    if (one_at_origin) x.cells[Element{0}] = 1;
    WitnessOptions opt;
    opt.fill = 0;
    return witness_build(Z, x, radius, depth, forbid_one(), Alphabet({"0", "1"}), opt);
}

/// Tentacle chains per branch word, walked from every in-patch base along `next`.
struct Chain {
    std::size_t word = 0;
    std::vector<Element> cells;
    bool left_patch = false;
};

inline std::vector<Chain> tentacle_chains(const LayeredPatch& p) {
    const auto& G = p.group();
    std::vector<Chain> out;
    for (std::size_t w = 0; w < p.words(); ++w)
        for (std::size_t e = 0; e < p.elements(); ++e) {
            const auto& c = p.cell(e, w);
            if (!c.tau || c.tau->empty || c.tau->prev != 0) continue;
            Chain ch;
            ch.word = w;
            Element cur = p.element(e);
            const TentacleSym* t = &*c.tau;
            while (true) {
                ch.cells.push_back(cur);
                if (t->next == 0) break;
                cur = G.mul(cur, G.generator(t->next));
                const auto* nc = p.find(cur, w);
                if (!nc || !nc->tau || nc->tau->empty) {
                    ch.left_patch = true;
                    break;
                }
                t = &*nc->tau;
                if (ch.cells.size() > p.elements()) break;
            }
            out.push_back(std::move(ch));
        }
    return out;
}

struct CliResult {
    int status = -1;
    std::string out;
};

inline CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(FORGE_CLI_PATH) + " " + args + " 2>/dev/null";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

inline std::string sample(const std::string& name) { return std::string(FORGE_SAMPLES_DIR) + "/" + name; }

// One invocation per subcommand (and per output format), all on the bundled samples.
inline std::vector<std::string> cli_invocations() {
    auto s = [](const char* name) { return sample(name); };
    return {
        "group ball --group F2 --radius 2",
        "group word --group 'Z x F2' --word 'a b a- b'",
        "subshift emit " + s("reflection.json"),
        "subshift scan " + s("forbid_one.json") + " " + s("z_config.json"),
        "subshift centers --group Z2 --n-max 2",
        "tree-shift build --radius 3",
        "tree-shift check " + s("tree_r3.json"),
        "tree-shift gamma --word 0110 --at 'a b'",
        "rooted-sft compile " + s("forbid_one.json"),
        "rooted-sft compile " + s("forbid_one.json") + " --format dot",
        "rooted-sft witness --subshift " + s("forbid_one.json") + " --radius 2 --depth 3 --config " + s("all_zero.json"),
        "rooted-sft verify " + s("small_witness.json"),
        "lab verify " + s("bad_patch.json"),
        "lab complete " + s("partial_patch.json") + " --count-all",
        "lab render " + s("small_witness.json") + " --format svg",
        "lab render " + s("bad_patch.json") + " --format dot --violations",
        "cert epsilon --cover-size 2 --eps 41/100",
        "cert check --cover-size 2 --box 2",
        "cert witness --kind reflection --pattern " + s("pattern3.json"),
        "cert witness --kind ball-mimic --pattern " + s("pattern3.json"),
        "toeplitz encode --prefix 0,1,1,0 --range 0:30",
        "toeplitz decode " + s("toeplitz_1_31.json") + " --steps 2",
        "toeplitz wbuild --group Z --config " + s("z_config.json") + " --h-radius 9 --n-radius 2",
        "toeplitz wcheck " + s("wpatch.json"),
    };
}

}  // namespace forge::testing
