#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "forge/nonsofic.hpp"
#include "forge/toeplitz.hpp"
#include "forge/tree_shift.hpp"
#include "support.hpp"

using namespace forge;

namespace {

struct Outcome {
    bool pass = true;
    std::string note;

    void expect(bool ok, const std::string& what) {
        if (!ok && pass) note = what;
        pass = pass && ok;
    }
};

std::int64_t pow3(int k) {
    std::int64_t p = 1;
    for (int i = 0; i < k; ++i) p *= 3;
    return p;
}

Outcome paradoxical_map() {
    Outcome o;
    ParadoxicalMap m;
    const auto& F = m.group();
    std::map<Element, std::set<Element>> pre;
    for (const auto& g : F.ball(6)) {
        auto img = m.phi(g);
        int s = F.generator_of(F.mul(F.inv(g), img));
        o.expect(s >= 1 && s <= 4, "displacement outside {a,a-,b,b-} at " + F.format_element(g));
        pre[img].insert(g);
    }
    for (const auto& g : F.ball(5)) o.expect(pre[g].size() == 3, "fiber size != 3 over " + F.format_element(g));
    return o;
}

Outcome tree_shift() {
    Outcome o;
    ParadoxicalMap m;
    const auto& F = m.group();
    auto tau = tau_build(m, 6);
    o.expect(check_tree_constraints(F, tau).empty(), "tau_build on B6 has violations");
    std::vector<std::vector<int>> words{{}};
    for (std::size_t i = 0; i < words.size(); ++i)
        if (words[i].size() < 3)
            for (int b : {0, 1}) {
                auto w = words[i];
                w.push_back(b);
                words.push_back(w);
            }
    std::set<Element> images;
    std::size_t walks = 0;
    for (const auto& g : F.ball(2)) {
        auto r = gamma(F, tau, {}, g);
        o.expect(F.mul(r, F.generator(tau.cells.at(r).p)) == g, "traversal identity fails at " + F.format_element(g));
        for (const auto& w : words) {
            try {
                images.insert(gamma(F, tau, w, g));
                ++walks;
            } catch (const BoundaryError&) {
            }
        }
    }
    o.expect(walks > 0 && images.size() == walks, "gamma images collide");
    o.note = o.pass ? std::to_string(walks) + " in-patch walks" : o.note;
    return o;
}

Outcome tile_compiler() {
    Outcome o;
    auto f = testing::zigzag_diagram();
    o.expect(f.run.halted && f.run.steps.size() == 4, "machine does not halt after 4 steps");
    o.expect(testing::enumerate_rows(f.ts, {}, 0) == std::vector<std::vector<int>>{f.rows[0]}, "seed row not unique");
    for (int n = 1; n <= f.depth; ++n) {
        auto rows = testing::enumerate_rows(f.ts, f.rows[static_cast<std::size_t>(n - 1)], n);
        o.expect(rows == std::vector<std::vector<int>>{f.rows[static_cast<std::size_t>(n)]},
                 "row " + std::to_string(n) + " not determined by the row below");
    }
    o.expect(computation_check(testing::embed_zone(f), f.ts).empty(), "computation_check reports violations");
    return o;
}

bool has_final(const Witness& w) {
    const auto& p = w.patch;
    for (std::size_t e = 0; e < p.elements(); ++e)
        for (std::size_t k = 0; k < p.words(); ++k) {
            const auto& c = p.cell(e, k);
            if (c.gamma && *c.gamma >= 0 && w.tiles[*c.gamma].final) return true;
        }
    return false;
}

Outcome round_trip() {
    Outcome o;
    auto zero = testing::criterion4_witness(false);
    o.expect(verify_patch(zero.patch, zero.tiles).empty(), "all-0 witness has violations");
    o.expect(!has_final(zero), "all-0 witness contains q_F");
    auto one = testing::criterion4_witness(true);
    o.expect(has_final(one), "q_F not produced for a 1 at the origin");
    auto v = verify_patch(one.patch, one.tiles);
    o.expect(!v.empty(), "q_F exclusion not flagged");
    for (const auto& x : v) o.expect(x.rule == "Z.final-state", "unexpected rule " + x.rule);
    return o;
}

Outcome wait_and_disjointness() {
    Outcome o;
    o.expect(wait_steps(3, 1) == 31, "wait_steps(3, 1) != 31");
    std::size_t chains = 0;
    for (bool one : {false, true}) {
        auto w = testing::criterion4_witness(one);
        const auto& p = w.patch;
        const auto& G = p.group();
        std::map<std::size_t, std::set<Element>> used;
        for (const auto& ch : testing::tentacle_chains(p)) {
            ++chains;
            for (const auto& c : ch.cells) o.expect(used[ch.word].insert(c).second, "tentacles overlap");
        }
        // Every cell has at most one predecessor, so chains reached from outside the patch are disjoint too.
        for (std::size_t k = 0; k < p.words(); ++k) {
            std::map<Element, int> indeg;
            for (std::size_t e = 0; e < p.elements(); ++e) {
                const auto& c = p.cell(e, k);
                if (!c.tau || c.tau->empty || c.tau->next == 0) continue;
                o.expect(++indeg[G.mul(p.element(e), G.generator(c.tau->next))] == 1, "two tentacles share a cell");
            }
        }
    }
    if (o.pass) o.note = std::to_string(chains) + " chains";
    return o;
}

Outcome certificates() {
    Outcome o;
    auto Z = Group::lattice(1);
    auto c2 = pigeonhole_certificate(2, Z, lattice_box(1, 2), Z, lattice_box(1, 2));
    o.expect(c2.valid && c2.lhs == BigInt(1) << 25 && c2.rhs == BigInt(1) << 24, "box 2 certificate");
    auto c1 = pigeonhole_certificate(2, Z, lattice_box(1, 1), Z, lattice_box(1, 1));
    o.expect(!c1.valid, "box 1 certificate should be invalid");
    auto f = [](double e) { return 2 * e + e * e - 1.0; };
    boost::math::tools::eps_tolerance<double> tol(50);
    auto [lo, hi] = boost::math::tools::bisect(f, 0.0, 1.0, tol);
    double root = (lo + hi) / 2;
    o.expect(std::abs(epsilon_bound(2).approx - root) < 1e-10, "epsilon_bound(2) disagrees with bisection");
    o.expect(std::abs(root - (std::sqrt(2.0) - 1)) < 1e-10, "bisection disagrees with sqrt(2) - 1");
    return o;
}

Outcome mirror_witnesses() {
    Outcome o;
    const std::int64_t window = 7;
    BoxPattern p{{0, 1, 1}, {1, 0, 0}, {1, 1, 0}};
    auto G = mirror_group();
    auto Z = Group::lattice(1);
    std::size_t mutations = 0;
    auto probe = [&](const ConfigPatch& y, const std::vector<PatternCoding>& codings, std::int64_t centre,
                     const std::string& kind) {
        o.expect(scan_patch(G, y, codings).empty(), kind + " witness matches a coding");
        for (std::int64_t t = -1; t <= 1; ++t)
            for (std::int64_t u = -1; u <= 1; ++u) {
                auto bad = y;
                auto& v = bad.cells.at(Group::pack({centre + t}, {u}));
                v = v == 1 ? 2 : 1;
                ++mutations;
                o.expect(!scan_patch(G, bad, codings).empty(), kind + " mutation undetected");
            }
    };
    auto yr = reflection_witness(p, window);
    probe(yr, reflection_codings(Z, window), -reflection_offset(1), "reflection");
    auto centers = disjoint_ball_centers(Z, 2);
    auto yb = ball_mimic_witness(p, window, centers);
    probe(yb, ball_mimic_codings(Z, centers, 2), centers.b[1][0], "ball-mimic");
    o.expect(yr.cells.size() == 225 && yb.cells.size() == 225, "window is not 15x15");
    if (o.pass) o.note = std::to_string(mutations) + " mutations detected";
    return o;
}

Outcome toeplitz() {
    Outcome o;
    for (int k = 2; k <= 7; ++k)
        for (int len = 1; len <= 6; ++len)
            for (int bits = 0; bits < (1 << len); ++bits) {
                std::vector<int> y(8, 0);
                for (int i = 0; i < len; ++i) y[static_cast<std::size_t>(i)] = (bits >> i) & 1;
                auto w = toeplitz_encode(y, 0, pow3(k) - 1);
                std::vector<int> got;
                while (w.size() >= 7) {
                    auto [y0, rest] = toeplitz_decode_step(w);
                    got.push_back(y0);
                    w = rest;
                }
                auto n = std::min<std::size_t>(got.size(), static_cast<std::size_t>(len));
                o.expect(got.size() + 1 >= static_cast<std::size_t>(k), "too few decode steps");
                o.expect(std::equal(got.begin(), got.begin() + static_cast<std::ptrdiff_t>(n), y.begin()),
                         "round trip lost the prefix");
            }
    std::int64_t filled = 0;
    for (const auto& t : toeplitz_tokens(1, pow3(7) - 1)) filled += t != "$";
    o.expect(filled == (pow3(7) - 1) / 2, "density on [1..3^7-1]");
    std::string s;
    for (const auto& t : toeplitz_tokens(0, 30)) s += t;
    o.expect(s == "$y0$y1y0$$y0$y2y0$y1y0$$y0$$y0$y1y0$$y0$y3y0$y1", "display window differs");
    return o;
}

Outcome determinism() {
    Outcome o;
    auto inv = testing::cli_invocations();
    for (const auto& args : inv) {
        auto a = testing::run_cli(args), b = testing::run_cli(args);
        o.expect(a.status == 0 || a.status == 1, "'" + args + "' exited with " + std::to_string(a.status));
        o.expect(!a.out.empty(), "'" + args + "' wrote nothing");
        o.expect(a.status == b.status && a.out == b.out, "'" + args + "' differs between runs");
    }
    if (o.pass) o.note = std::to_string(inv.size()) + " invocations";
    return o;
}

struct Criterion {
    int id;
    std::string name;
    double limit_s;  // 0 for no runtime bound
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    std::vector<Criterion> all{
        {1, "paradoxical map is 3-to-1 on B5", 5, paradoxical_map},
        {2, "tree shift constraints and gamma injectivity", 10, tree_shift},
        {3, "tile compiler reproduces the zigzag diagram", 0, tile_compiler},
        {4, "witness round trip on Z", 60, round_trip},
        {5, "wait formula and tentacle disjointness", 0, wait_and_disjointness},
        {6, "counting certificate and epsilon bound", 0, certificates},
        {7, "mirror witnesses on 15x15 windows", 0, mirror_witnesses},
        {8, "Toeplitz round trip, density and display", 0, toeplitz},
        {9, "CLI determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0 && secs >= c.limit_s) o.expect(false, "over the time limit");
        std::ostringstream line;
        line << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << std::fixed
             << std::setprecision(2) << secs << " s";
        if (c.limit_s > 0) line << ", limit " << std::setprecision(0) << c.limit_s << " s";
        line << ")";
        if (!o.note.empty()) line << " - " << o.note;
        std::cout << line.str() << std::endl;
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
