#include <doctest.h>

#include <random>

#include "forge/json_io.hpp"
#include "support.hpp"

using namespace forge;

TEST_SUITE("json-io") {
    TEST_CASE("group names and documents") {
        CHECK(parse_group_name("Z") == Group::lattice(1));
        CHECK(parse_group_name("Z2") == Group::lattice(2));
        CHECK(parse_group_name("Z^3") == Group::lattice(3));
        CHECK(parse_group_name("F2") == Group::free(2));
        CHECK(parse_group_name("Z x F2") == Group::product(Group::lattice(1), Group::free(2)));
        CHECK_THROWS_AS(parse_group_name(""), FormatError);
        CHECK_THROWS_AS(parse_group_name("Q"), FormatError);
        for (const auto& G : {Group::lattice(2), Group::free(3), Group::product(Group::free(2), Group::lattice(1))}) {
            CHECK(group_from_json(group_to_json(G)) == G);
            for (const auto& g : G.ball(2)) {
                auto w = G.normal_word(g);
                CHECK(word_from_json(G, word_to_json(G, w)) == w);
                CHECK(element_from_json(G, Json(G.format_element(g))) == g);
            }
        }
    }

    TEST_CASE("subshift documents round trip") {
        auto d = subshift_from_json(read_json_file(testing::sample("forbid_one.json")));
        CHECK(d.group == Group::lattice(1));
        REQUIRE(d.spec.codings.size() == 1);
        auto j = subshift_to_json(d);
        CHECK(subshift_to_json(subshift_from_json(j)) == j);
        auto r = subshift_from_json(read_json_file(testing::sample("reflection.json")));
        CHECK(r.spec.source == SubshiftSpec::Source::reflection);
        auto rj = subshift_to_json(r);
        CHECK(subshift_to_json(subshift_from_json(rj)) == rj);
        auto over = subshift_from_json(j, Group::lattice(2));
        CHECK(over.group == Group::lattice(2));
        CHECK_THROWS_AS(subshift_from_json(Json{{"alphabet", {"0"}}, {"codings", {{"generator", "magic"}}}}), FormatError);
        CHECK_THROWS_AS(read_json_file(testing::sample("missing.json")), FormatError);
    }

    TEST_CASE("configurations round trip") {
        auto Z2 = Group::lattice(2);
        Alphabet A({"0", "1", "2"});
        std::mt19937 rng(2);
        std::uniform_int_distribution<int> sym(0, 2);
        ConfigPatch x;
        x.radius = 3;
        for (const auto& g : Z2.ball(3)) x.cells[g] = sym(rng);
        auto y = config_from_json(Z2, A, config_to_json(Z2, A, x));
        CHECK(y.radius == x.radius);
        CHECK(y.cells == x.cells);
        auto z = config_from_json(Group::lattice(1), Alphabet({"0", "1"}), read_json_file(testing::sample("z_config.json")));
        CHECK(z.cells.size() == Group::lattice(1).ball(16).size());
        CHECK(z.at({2}) == 1);
        CHECK(z.at({-3}) == 1);
        CHECK(z.at({3}) == 0);
        CHECK_THROWS_AS(config_from_json(Z2, A, Json{{"radius", 1}, {"cells", Json::array({Json::array({"a", "7"})})}}), SpecError);
    }

    TEST_CASE("tree patches round trip") {
        ParadoxicalMap m;
        auto t = tau_build(m, 3);
        auto j = tree_to_json(t, 3);
        auto back = tree_from_json(j);
        CHECK(back.cells.size() == t.cells.size());
        CHECK(tree_to_json(back, 3) == j);
        CHECK(check_tree_constraints(m.group(), back).empty());
    }

    TEST_CASE("layered patches round trip") {
        auto [doc, ts] = layered_from_json(read_json_file(testing::sample("small_witness.json")));
        REQUIRE(doc.patch);
        auto j = layered_to_json(doc, ts);
        auto [doc2, ts2] = layered_from_json(j);
        CHECK(*doc2.patch == *doc.patch);
        CHECK(ts2.count() == ts.count());
        CHECK(layered_to_json(doc2, ts2) == j);

        auto wt = testing::criterion4_witness(false, 3, 4);
        LayeredDoc d;
        d.subshift.group = Group::lattice(1);
        d.subshift.spec.alphabet = Alphabet({"0", "1"});
        d.subshift.spec.codings = testing::forbid_one();
        d.patch = wt.patch;
        auto [d3, ts3] = layered_from_json(layered_to_json(d, wt.tiles));
        CHECK(*d3.patch == wt.patch);
        CHECK(tile_keys(ts3) == tile_keys(wt.tiles));
    }

    TEST_CASE("partially set cells survive") {
        auto wt = testing::criterion4_witness(false, 2, 3);
        auto p = wt.patch;
        p.cell(1, 2).gamma.reset();
        p.cell(0, 0).alpha.reset();
        p.cell(2, 5).tau.reset();
        LayeredDoc d;
        d.subshift.spec.alphabet = Alphabet({"0", "1"});
        d.subshift.spec.codings = testing::forbid_one();
        d.patch = p;
        auto [back, ts] = layered_from_json(layered_to_json(d, wt.tiles));
        CHECK(*back.patch == p);
        CHECK_FALSE(back.patch->cell(1, 2).gamma);
    }

    TEST_CASE("reports and certificates") {
        auto wt = testing::criterion4_witness(false, 2, 3);
        auto r = layer_report_json(wt.patch, {});
        CHECK(r.at("valid") == true);
        CHECK(r.at("violations").empty());
        auto c = pigeonhole_certificate(2, 5, 2, 5, 2);
        auto cj = certificate_to_json(c);
        CHECK(cj.at("d_TxU") == 24);
        CHECK(cj.at("lhs").at("value") == "33554432");
        CHECK(cj.at("valid") == true);
        CHECK(big_to_json(boost::multiprecision::pow(BigInt(2), 40000)).at("digits") == 12042);
    }

    TEST_CASE("Toeplitz words and coupling patches round trip") {
        auto w = toeplitz_encode({1, 0, 1, 1}, -5, 30);
        CHECK(toeplitz_from_json(toeplitz_to_json(w)) == w);
        auto sample = toeplitz_from_json(read_json_file(testing::sample("toeplitz_1_31.json")));
        CHECK(sample.lo == 1);
        CHECK(sample.hi == 31);
        CHECK_THROWS_AS(toeplitz_from_json(Json{{"lo", 0}, {"hi", 3}, {"cells", {"$"}}}), FormatError);
        CHECK_THROWS_AS(toeplitz_from_json(Json{{"lo", 0}, {"hi", 0}, {"cells", {"x"}}}), FormatError);

        std::mt19937 rng(9);
        std::uniform_int_distribution<int> bit(0, 1);
        auto N = Group::free(2);
        ConfigPatch z;
        z.radius = 5;
        for (const auto& g : N.ball(5)) z.cells[g] = bit(rng);
        auto p = w_build(N, {0, 1, 3}, z, 4, 1);
        auto j = wpatch_to_json(p);
        auto q = wpatch_from_json(j);
        CHECK(wpatch_to_json(q) == j);
        CHECK(w_rules_check(q).empty());
        auto file = wpatch_from_json(read_json_file(testing::sample("wpatch.json")));
        CHECK_FALSE(file.cells.empty());
    }
}
