#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "helpers.hpp"
#include "polemb/common.hpp"
#include "polemb/config.hpp"

using namespace polemb;

TEST_CASE("config parses sections, comments, and types", "[config]") {
    const auto cfg = Config::parse(
        "# top comment\n"
        "seed = 42\n"
        "\n"
        "[embed]\n"
        "method = re   \n"
        "dim=20\n"
        "; another comment\n"
        "lr = 0.025\n"
        "shared = true\n");
    CHECK(cfg.get_int("seed", 0) == 42);
    CHECK(cfg.get_string("embed.method", "") == "re");
    CHECK(cfg.get_int("embed.dim", 0) == 20);
    CHECK(cfg.get_double("embed.lr", 0.0) == Catch::Approx(0.025));
    CHECK(cfg.get_bool("embed.shared", false));
    CHECK(cfg.has("embed.dim"));
    CHECK_FALSE(cfg.has("embed.missing"));
}

TEST_CASE("config getters fall back only when absent", "[config]") {
    const auto cfg = Config::parse("x = notanumber\n");
    CHECK(cfg.get_int("absent", 7) == 7);
    CHECK(cfg.get_double("absent", 1.5) == 1.5);
    CHECK(cfg.get_bool("absent", true));
    CHECK_THROWS_AS(cfg.get_int("x", 7), ConfigError);
    CHECK_THROWS_AS(cfg.get_double("x", 1.0), ConfigError);
    CHECK_THROWS_AS(cfg.get_bool("x", false), ConfigError);
}

TEST_CASE("config rejects malformed input", "[config]") {
    CHECK_THROWS_AS(Config::parse("[unclosed\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[]\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("novalue\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("= 3\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);
    // Same key in different sections is fine.
    CHECK_NOTHROW(Config::parse("[a]\nk = 1\n[b]\nk = 2\n"));
}

TEST_CASE("config error messages carry origin and line", "[config]") {
    try {
        Config::parse("ok = 1\nbroken\n", "test.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("test.ini:2") != std::string::npos);
    }
}

TEST_CASE("require_* throws on missing keys", "[config]") {
    const auto cfg = Config::parse("a = 1\n");
    CHECK(cfg.require_int("a") == 1);
    CHECK_THROWS_AS(cfg.require_string("b"), ConfigError);
    CHECK_THROWS_AS(cfg.require_double("b"), ConfigError);
}

TEST_CASE("bool spellings are case-insensitive", "[config]") {
    const auto cfg = Config::parse("a = YES\nb = Off\nc = 1\nd = false\n");
    CHECK(cfg.require_bool("a"));
    CHECK_FALSE(cfg.require_bool("b"));
    CHECK(cfg.require_bool("c"));
    CHECK_FALSE(cfg.require_bool("d"));
}

TEST_CASE("sections and keys preserve file order", "[config]") {
    const auto cfg = Config::parse(
        "[synth.region.north]\nparties = 3\n"
        "[eval]\nreps = 5\n"
        "[synth.region.south]\nparties = 2\n");
    const auto regions = cfg.sections_with_prefix("synth.region.");
    REQUIRE(regions.size() == 2);
    CHECK(regions[0] == "synth.region.north");
    CHECK(regions[1] == "synth.region.south");
    const auto keys = cfg.keys_in("eval");
    REQUIRE(keys.size() == 1);
    CHECK(keys[0] == "reps");
}

TEST_CASE("set overrides and snapshot round-trips", "[config]") {
    auto cfg = Config::parse("[embed]\ndim = 10\n");
    cfg.set("embed.dim", "20");
    cfg.set("embed.extra", "x");
    CHECK(cfg.get_int("embed.dim", 0) == 20);
    const auto again = Config::parse(cfg.snapshot());
    CHECK(again.get_int("embed.dim", 0) == 20);
    CHECK(again.get_string("embed.extra", "") == "x");
}

TEST_CASE("config loads from a file", "[config]") {
    testutil::TempDir dir;
    const auto path = dir.file("c.ini");
    write_file(path, "n = 9\n");
    CHECK(Config::load(path).get_int("n", 0) == 9);
    CHECK_THROWS_AS(Config::load(dir.file("missing.ini")), DataError);
}
