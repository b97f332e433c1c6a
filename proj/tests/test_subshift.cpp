#include <doctest.h>

#include <random>
#include <set>
#include <tuple>

#include "forge/subshift.hpp"

using namespace forge;

namespace {

ConfigPatch patch_of(std::map<Element, int> cells, std::int64_t radius) {
    ConfigPatch p;
    p.radius = radius;
    p.cells = std::move(cells);
    return p;
}

// Independent matcher: element map first, then a lookup per entry.
std::set<std::pair<std::size_t, Element>> brute_scan(const Group& G, const ConfigPatch& patch,
                                                     const std::vector<PatternCoding>& codings) {
    std::set<std::pair<std::size_t, Element>> out;
    for (std::size_t i = 0; i < codings.size(); ++i) {
        std::map<Element, int> want;
        bool consistent = true;
        for (const auto& [w, a] : codings[i].entries) {
            auto e = G.eval(w);
            auto it = want.find(e);
            if (it != want.end() && it->second != a) consistent = false;
            want[e] = a;
        }
        if (!consistent) continue;
        for (const auto& [g, v] : patch.cells) {
            (void)v;
            bool all = true;
            for (const auto& [e, a] : want) {
                auto it = patch.cells.find(G.mul(g, e));
                if (it == patch.cells.end() || it->second != a) {
                    all = false;
                    break;
                }
            }
            if (all) out.insert({i, g});
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("subshift") {
    TEST_CASE("coding_matches is tri-state") {
        auto Z = Group::lattice(1);
        auto p = patch_of({{{0}, 0}}, 0);
        CHECK(coding_matches(Z, p, {{{Word{}, 0}}}, {0}).value == Match::matches);
        CHECK(coding_matches(Z, p, {{{Word{}, 0}, {Word{1}, 1}}}, {0}).value == Match::undetermined);
        CHECK(coding_matches(Z, p, {{{Word{}, 1}}}, {0}).value == Match::refuted);

        auto mirror = patch_of({{{0}, 0}, {{1}, 1}, {{-1}, 1}}, 1);
        PatternCoding refl{{{Word{}, 0}, {Word{1}, 1}, {Word{2}, 2}}};
        CHECK(coding_matches(Z, mirror, refl, {0}).value == Match::refuted);
    }

    TEST_CASE("inconsistent codings match nothing") {
        auto Z = Group::lattice(1);
        auto p = patch_of({{{0}, 0}, {{1}, 0}}, 1);
        PatternCoding bad{{{Word{1}, 0}, {Word{1, 0}, 1}}};
        auto r = coding_matches(Z, p, bad, {0});
        CHECK(r.value == Match::refuted);
        CHECK_FALSE(r.diagnostic.empty());
        CHECK(coding_inconsistency(Z, bad));
        CHECK(scan_patch(Z, p, {bad}).empty());
        PatternCoding same{{{Word{1}, 0}, {Word{2, 1, 1}, 0}}};
        CHECK_FALSE(coding_inconsistency(Z, same));
    }

    TEST_CASE("reflection coding counts") {
        auto Z = Group::lattice(1);
        CHECK(reflection_codings(Z, 0).empty());
        CHECK(reflection_codings_raw(Z, 1).size() == 12);
        CHECK(reflection_codings(Z, 1).size() == 6);
        CHECK(reflection_alphabet().symbols == std::vector<std::string>{"*", "0", "1"});
    }

    TEST_CASE("reflection dedup against an independent quotient") {
        for (const auto& G : {Group::lattice(1), Group::lattice(2), Group::free(2)}) {
            for (std::int64_t len = 1; len <= 2; ++len) {
                std::set<std::tuple<Element, int, int>> classes;
                for (const auto& c : reflection_codings_raw(G, len)) {
                    auto e = G.eval(c.entries[1].first);
                    int x = c.entries[1].second, y = c.entries[2].second;
                    classes.insert(std::min(std::make_tuple(e, x, y), std::make_tuple(G.inv(e), y, x)));
                }
                auto dedup = reflection_codings(G, len);
                CHECK(dedup.size() == classes.size());
                std::set<std::tuple<Element, int, int>> seen;
                for (const auto& c : dedup) {
                    REQUIRE(c.entries.size() == 3);
                    CHECK(c.entries[0] == std::make_pair(Word{}, 0));
                    auto e = G.eval(c.entries[1].first);
                    CHECK(G.eval(c.entries[2].first) == G.inv(e));
                    CHECK(c.entries[1].second != c.entries[2].second);
                    int x = c.entries[1].second, y = c.entries[2].second;
                    seen.insert(std::min(std::make_tuple(e, x, y), std::make_tuple(G.inv(e), y, x)));
                }
                CHECK(seen == classes);
            }
        }
    }

    TEST_CASE("constant patch with one star refutes every reflection coding") {
        auto Z2 = Group::lattice(2);
        ConfigPatch p;
        p.radius = 4;
        for (const auto& g : Z2.ball(4)) p.cells[g] = 1;
        p.cells[Z2.identity()] = 0;
        CHECK(scan_patch(Z2, p, reflection_codings(Z2, 3)).empty());
    }

    TEST_CASE("ball centers pass the verifier") {
        auto Z = Group::lattice(1);
        auto c0 = disjoint_ball_centers(Z, 0);
        CHECK(c0.u.size() == 1);
        CHECK_FALSE(verify_ball_centers(Z, c0));
        for (std::int64_t n = 1; n <= 4; ++n) CHECK_FALSE(verify_ball_centers(Z, disjoint_ball_centers(Z, n)));
        CHECK_FALSE(verify_ball_centers(Group::free(2), disjoint_ball_centers(Group::free(2), 1)));
        CHECK_FALSE(verify_ball_centers(Group::lattice(2), disjoint_ball_centers(Group::lattice(2), 2)));
    }

    TEST_CASE("center verifier rejects overlaps") {
        auto Z = Group::lattice(1);
        BallCenters bad;
        bad.u = {Word{1}, Word{1, 1, 1}};
        bad.v = {Word{2}, Word{1, 1}};
        CHECK(verify_ball_centers(Z, bad));
        BallCenters origin;
        origin.u = {Word{}};
        origin.v = {Word{1}};
        CHECK(verify_ball_centers(Z, origin));
    }

    TEST_CASE("ball-mimic codings") {
        auto Z = Group::lattice(1);
        auto c = disjoint_ball_centers(Z, 2);
        auto n0 = ball_mimic_codings(Z, c, 0);
        CHECK(n0.size() == 6);
        auto u0 = Z.eval(c.u[0]), v0 = Z.eval(c.v[0]);
        for (const auto& k : n0) {
            CHECK(Z.eval(k.entries[1].first) == u0);
            CHECK(Z.eval(k.entries[2].first) == v0);
        }
        ConfigPatch p;
        p.radius = 8;
        for (const auto& g : Z.ball(8)) p.cells[g] = 1;
        p.cells[Z.identity()] = 0;
        CHECK(scan_patch(Z, p, n0).empty());
        for (const auto& k : ball_mimic_codings(Z, c, 2))
            for (const auto& [w, a] : k.entries) {
                (void)a;
                CHECK(Z.geodesic(w) == w);
            }
        // sum over n <= 2 of |B_n| * 6
        CHECK(ball_mimic_codings(Z, c, 2).size() == (1 + 3 + 5) * 6);
    }

    TEST_CASE("scan examples") {
        auto Z = Group::lattice(1);
        auto p = patch_of({{{0}, 0}, {{1}, 1}, {{-1}, 2}}, 1);
        CHECK(scan_patch(Z, p, {}).empty());
        auto v = scan_patch(Z, p, reflection_codings(Z, 1));
        REQUIRE(v.size() == 1);
        CHECK(v[0].at == Element{0});

        // Central rows of a reflection configuration on Z^2.
        auto Z2 = Group::lattice(2);
        ConfigPatch q;
        q.radius = 3;
        for (const auto& g : Z2.ball(3)) q.cells[g] = 1 + static_cast<int>((std::llabs(g[0]) * 3 + std::llabs(g[1])) % 2);
        q.cells[Z2.identity()] = 0;
        CHECK(scan_patch(Z2, q, reflection_codings(Z2, 3)).empty());
    }

    TEST_CASE("scan agrees with a brute-force double loop") {
        std::mt19937 rng(5);
        auto Z2 = Group::lattice(2);
        auto words = Z2.ball(2);
        for (int trial = 0; trial < 20; ++trial) {
            ConfigPatch p;
            p.radius = 5;
            std::uniform_int_distribution<int> sym(0, 2);
            for (const auto& g : Z2.ball(5))
                if (sym(rng) != 0 || trial % 2) p.cells[g] = sym(rng);
            std::vector<PatternCoding> codings;
            std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
            for (int k = 0; k < 25; ++k) {
                PatternCoding c;
                int entries = 1 + k % 3;
                for (int i = 0; i < entries; ++i) c.entries.emplace_back(Z2.normal_word(words[pick(rng)]), sym(rng));
                codings.push_back(c);
            }
            auto got = scan_patch(Z2, p, codings);
            std::set<std::pair<std::size_t, Element>> gs;
            for (const auto& v : got) gs.insert({v.coding, v.at});
            CHECK(gs.size() == got.size());
            CHECK(gs == brute_scan(Z2, p, codings));
        }
    }

    TEST_CASE("coding_matches is monotone under extension") {
        std::mt19937 rng(9);
        auto Z = Group::lattice(1);
        auto B = Z.ball(4);
        for (int trial = 0; trial < 200; ++trial) {
            std::uniform_int_distribution<int> sym(0, 1), keep(0, 2);
            std::map<Element, int> full;
            for (const auto& g : B) full[g] = sym(rng);
            ConfigPatch part;
            part.radius = 4;
            for (const auto& [g, v] : full)
                if (keep(rng)) part.cells[g] = v;
            ConfigPatch whole;
            whole.radius = 4;
            whole.cells = full;
            PatternCoding c;
            for (int i = 0; i < 3; ++i) c.entries.emplace_back(Z.normal_word({static_cast<std::int64_t>(i) - 1}), sym(rng));
            auto before = coding_matches(Z, part, c, {0}).value;
            auto after = coding_matches(Z, whole, c, {0}).value;
            if (before != Match::undetermined) CHECK(before == after);
            CHECK(after != Match::undetermined);
        }
    }

    TEST_CASE("spec sources emit over the alphabet") {
        auto Z = Group::lattice(1);
        SubshiftSpec s;
        s.alphabet = reflection_alphabet();
        s.source = SubshiftSpec::Source::reflection;
        s.parameter = 2;
        CHECK(s.emit(Z) == reflection_codings(Z, 2));
        s.source = SubshiftSpec::Source::ball_mimic;
        s.parameter = 1;
        for (const auto& c : s.emit(Z))
            for (const auto& [w, a] : c.entries) {
                (void)w;
                CHECK(a >= 0);
                CHECK(a < 3);
            }
        CHECK_THROWS_AS(Alphabet({"0", "0"}), SpecError);
        CHECK_THROWS_AS(Alphabet(std::vector<std::string>{}), SpecError);
    }
}
