#include <doctest.h>

#include "forge/json_io.hpp"
#include "support.hpp"

using namespace forge;
using testing::run_cli;
using testing::sample;

TEST_SUITE("cli") {
    TEST_CASE("help and usage errors") {
        CHECK(run_cli("--help").status == 0);
        CHECK(run_cli("bogus").status == 2);
        CHECK(run_cli("cert check").status == 2);
        CHECK(run_cli("lab verify " + sample("missing.json")).status == 2);
        CHECK(run_cli("group ball --group Q").status == 2);
    }

    TEST_CASE("certificate exit codes") {
        auto ok = run_cli("cert check --cover-size 2 --box 2");
        CHECK(ok.status == 0);
        auto j = Json::parse(ok.out);
        CHECK(j.at("valid") == true);
        CHECK(j.at("d_TxU") == 24);
        CHECK(run_cli("cert check --cover-size 2 --box 1").status == 1);
        CHECK(run_cli("cert epsilon --cover-size 2 --eps 0.42").status == 1);
    }

    TEST_CASE("layered patch verification") {
        CHECK(run_cli("rooted-sft verify " + sample("witness_r8d8.json")).status == 0);
        auto bad = run_cli("lab verify " + sample("bad_patch.json"));
        CHECK(bad.status == 1);
        auto j = Json::parse(bad.out);
        CHECK(j.at("valid") == false);
        CHECK_FALSE(j.at("violations").empty());
        CHECK(run_cli("lab complete " + sample("contradictory_patch.json")).status == 1);
        auto done = run_cli("lab complete " + sample("partial_patch.json") + " --count-all");
        CHECK(done.status == 0);
        CHECK(Json::parse(done.out).at("outcome") == "completed");
    }

    TEST_CASE("threads do not change reports") {
        auto one = run_cli("--threads 1 lab verify " + sample("bad_patch.json"));
        auto four = run_cli("--threads 4 lab verify " + sample("bad_patch.json"));
        CHECK(one.out == four.out);
    }

    TEST_CASE("scan output") {
        auto r = run_cli("subshift scan " + sample("forbid_one.json") + " " + sample("z_config.json"));
        CHECK(r.status == 1);
        auto j = Json::parse(r.out);
        CHECK(j.at("violations").size() == 4);
    }

    TEST_CASE("every subcommand is deterministic") {
        for (const auto& args : testing::cli_invocations()) {
            auto a = run_cli(args), b = run_cli(args);
            INFO(args);
            CHECK(a.status >= 0);
            CHECK(a.status <= 1);
            CHECK_FALSE(a.out.empty());
            CHECK(a.status == b.status);
            CHECK(a.out == b.out);
        }
    }
}
