#include <doctest.h>

#include <random>

#include "forge/toeplitz.hpp"

using namespace forge;

namespace {

std::int64_t pow3(int k) {
    std::int64_t p = 1;
    for (int i = 0; i < k; ++i) p *= 3;
    return p;
}

// Level by trial over n, independent of toeplitz_level.
int level_oracle(std::int64_t j) {
    for (int n = 0; n < 40; ++n) {
        auto m = pow3(n + 1);
        if (pos_mod(j, m) == pow3(n)) return n;
        if (pow3(n) > std::llabs(j) + 1) break;
    }
    return -1;
}

ConfigPatch random_config(const Group& N, std::int64_t radius, std::mt19937& rng) {
    std::uniform_int_distribution<int> bit(0, 1);
    ConfigPatch x;
    x.radius = radius;
    for (const auto& g : N.ball(radius)) x.cells[g] = bit(rng);
    return x;
}

}  // namespace

TEST_SUITE("toeplitz") {
    TEST_CASE("track positions") {
        CHECK(toeplitz_level(1) == 0);
        CHECK(toeplitz_level(3) == 1);
        CHECK(toeplitz_level(9) == 2);
        CHECK(toeplitz_level(0) == -1);
        CHECK(toeplitz_level(2) == -1);
        CHECK(toeplitz_level(-2) == 0);
        for (std::int64_t j = -800; j <= 800; ++j) CHECK(toeplitz_level(j) == level_oracle(j));
    }

    TEST_CASE("display of the first window") {
        std::string s;
        for (const auto& t : toeplitz_tokens(0, 30)) s += t;
        CHECK(s == "$y0$y1y0$$y0$y2y0$y1y0$$y0$$y0$y1y0$$y0$y3y0$y1");
    }

    TEST_CASE("track density") {
        for (int k = 1; k <= 7; ++k) {
            std::int64_t filled = 0;
            for (const auto& t : toeplitz_tokens(1, pow3(k) - 1)) filled += t != "$";
            CHECK(filled == (pow3(k) - 1) / 2);
        }
    }

    TEST_CASE("encode fills tracks and rejects short prefixes") {
        std::vector<int> y{0, 1, 1, 0};
        auto w = toeplitz_encode(y, -20, 40);
        CHECK(w.size() == 61);
        for (std::int64_t j = -20; j <= 40; ++j) {
            int n = level_oracle(j);
            CHECK(w.at(j) == (n < 0 ? kDollar : y[static_cast<std::size_t>(n)]));
        }
        CHECK_THROWS_AS(toeplitz_encode(y, 0, 81), BoundaryError);
        CHECK_THROWS_AS(toeplitz_encode(y, 3, 2), SpecError);
    }

    TEST_CASE("decode step drops the first track") {
        std::mt19937 rng(3);
        std::uniform_int_distribution<int> sym(0, 2);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<int> y(9);
            for (auto& v : y) v = sym(rng);
            std::uniform_int_distribution<std::int64_t> start(-200, 200), len(7, 400);
            auto lo = start(rng);
            auto hi = lo + len(rng) - 1;
            auto w = toeplitz_encode(y, lo, hi);
            auto [y0, rest] = toeplitz_decode_step(w);
            CHECK(y0 == y[0]);
            std::vector<int> tail(y.begin() + 1, y.end());
            CHECK(rest == toeplitz_encode(tail, rest.lo, rest.hi));
            CHECK(3 * rest.lo >= lo);
            CHECK(3 * (rest.lo - 1) < lo);
            CHECK(3 * rest.hi <= hi);
            CHECK(3 * (rest.hi + 1) > hi);
        }
    }

    TEST_CASE("round trip recovers the prefix") {
        std::mt19937 rng(11);
        std::uniform_int_distribution<int> bit(0, 1);
        for (int k = 2; k <= 7; ++k) {
            for (int trial = 0; trial < 4; ++trial) {
                std::vector<int> y(9);
                for (auto& v : y) v = bit(rng);
                auto half = pow3(k) / 2;
                auto w = toeplitz_encode(y, -half, half);
                std::vector<int> got;
                while (w.size() >= 7) {
                    auto [y0, rest] = toeplitz_decode_step(w);
                    got.push_back(y0);
                    w = rest;
                }
                REQUIRE(got.size() == static_cast<std::size_t>(k - 1));
                CHECK(std::equal(got.begin(), got.end(), y.begin()));
            }
        }
    }

    TEST_CASE("malformed windows") {
        ToeplitzWord dollars{0, 8, std::vector<int>(9, kDollar)};
        CHECK_THROWS_AS(toeplitz_decode_step(dollars), FormatError);
        auto w = toeplitz_encode({0, 1, 0}, 0, 5);
        CHECK_THROWS_AS(toeplitz_decode_step(w), FormatError);
        auto shifted = toeplitz_encode({0, 1, 0, 1}, 0, 26);
        shifted.lo += 1;
        shifted.hi += 1;
        CHECK_THROWS_AS(toeplitz_decode_step(shifted), FormatError);
    }

    TEST_CASE("set representation of the shift action") {
        auto N = Group::lattice(1);
        std::vector<int> S{0, 1, 2};
        std::mt19937 rng(23);
        auto x = random_config(N, 12, rng);
        const std::size_t K = 7;
        auto t = shift_action_table(N, S, K);
        CHECK(t.identity_slot == 0);
        auto y = setrep_build(N, S, x, K);
        CHECK(setrep_check(y, t).empty());
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 1; i < S.size(); ++i) {
                auto bad = y;
                bad[k][i] ^= 1;
                auto v = setrep_check(bad, t);
                if (t.source[i][k] >= 0) {
                    CHECK(v == std::vector<SetRepViolation>{{i, k}});
                } else {
                    CHECK(v.empty());
                }
            }
        CHECK_THROWS_AS(shift_action_table(N, {1, 2}, K), SpecError);
        ConfigPatch tiny;
        tiny.cells[{0}] = 0;
        CHECK_THROWS_AS(setrep_build(N, S, tiny, K), BoundaryError);
    }

    TEST_CASE("coupling rules hold on the built patch") {
        std::mt19937 rng(29);
        for (const auto& N : {Group::lattice(1), Group::free(2)}) {
            std::vector<int> S{0, 1, N.num_generators() - 1};
            auto z = random_config(N, 8, rng);
            auto p = w_build(N, S, z, 9, 2);
            CHECK(w_rules_check(p).empty());
            std::size_t filled = 0;
            for (const auto& [key, c] : p.cells) {
                CHECK(c.d == std::pair<int, int>{2, 1});
                filled += c.y.has_value();
            }
            CHECK(filled > 0);
        }
    }

    TEST_CASE("perturbations are caught locally") {
        auto N = Group::lattice(1);
        std::vector<int> S{0, 1, 2};
        std::mt19937 rng(31);
        auto z = random_config(N, 10, rng);
        auto base = w_build(N, S, z, 9, 3);
        for (std::int64_t h : {1, 3, 4}) {
            auto p = base;
            auto& c = p.cells.at({Element{h}, Element{0}});
            REQUIRE(c.y);
            (*c.y)[0] ^= 1;
            auto v = w_rules_check(p);
            CHECK_FALSE(v.empty());
            CHECK(v.size() <= S.size());
            for (const auto& x : v) {
                CHECK(x.rule == "W.coupling");
                CHECK(x.h == Element{h});
            }
        }
        auto p = base;
        p.cells.at({Element{0}, Element{0}}).d = {1, 2};
        bool direction = false;
        for (const auto& x : w_rules_check(p)) direction = direction || x.rule == "W.direction";
        CHECK(direction);
        p = base;
        p.cells.at({Element{1}, Element{1}}).y.reset();
        CHECK_FALSE(w_rules_check(p).empty());
        p = base;
        p.S = {1, 2};
        CHECK_THROWS_AS(w_rules_check(p), SpecError);
    }
}
