#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "helpers.hpp"
#include "polemb/common.hpp"
#include "polemb/labels.hpp"

using namespace polemb;

TEST_CASE("tier parsing is case-insensitive", "[labels]") {
    CHECK(parse_tier("member") == Tier::Member);
    CHECK(parse_tier("Supporter") == Tier::Supporter);
    CHECK(parse_tier("SYMPATHIZER") == Tier::Sympathizer);
    CHECK_FALSE(parse_tier("fan").has_value());
    CHECK(std::string(tier_name(Tier::Supporter)) == "supporter");
}

TEST_CASE("party indices follow first registration order", "[labels]") {
    LabelSet ls;
    CHECK(ls.add_party("R1", "Red") == 0);
    CHECK(ls.add_party("R1", "Blue") == 1);
    CHECK(ls.add_party("R1", "Red") == 0);   // idempotent
    CHECK(ls.add_party("R2", "Red") == 0);   // catalogs are per region
    const auto& cat = ls.parties("R1");
    REQUIRE(cat.size() == 2);
    CHECK(cat[0].name == "Red");
    CHECK(cat[1].name == "Blue");
    CHECK_FALSE(cat[0].color.empty());  // palette fallback
    CHECK_THROWS_AS(ls.parties("R9"), DataError);
}

TEST_CASE("assignments, tiers, and counts", "[labels]") {
    LabelSet ls;
    ls.add(1, "R1", "Red", Tier::Member);
    ls.add(2, "R1", "Blue", Tier::Member);
    ls.add(3, "R1", "Red", Tier::Supporter);
    ls.add(9, "R1", "Red", Tier::Member);
    CHECK(ls.size() == 4);
    REQUIRE(ls.label(1).has_value());
    CHECK(ls.label(1)->party == 0);
    CHECK(ls.label(1)->tier == Tier::Member);
    CHECK_FALSE(ls.label(42).has_value());

    const auto members = ls.users_in("R1", Tier::Member);
    CHECK(members == std::vector<UserId>{1, 2, 9});
    CHECK(ls.users_in("R1").size() == 4);
    CHECK(ls.users_in("nowhere").empty());

    const auto counts = ls.class_counts("R1", Tier::Member);
    REQUIRE(counts.size() == 2);
    CHECK(counts[0] == 2);
    CHECK(counts[1] == 1);

    CHECK_THROWS_AS(ls.add(1, "R1", "Red", Tier::Member), DataError);  // duplicate user
}

TEST_CASE("party_must_exist enforces the catalog", "[labels]") {
    LabelSet ls;
    ls.add_party("R1", "Red", "#ff0000");
    CHECK_NOTHROW(ls.add(1, "R1", "Red", Tier::Member, true));
    CHECK_THROWS_AS(ls.add(2, "R1", "Green", Tier::Member, true), DataError);
    CHECK_THROWS_AS(ls.add(3, "R2", "Red", Tier::Member, true), DataError);
}

TEST_CASE("label files round-trip", "[labels]") {
    testutil::TempDir dir;
    const auto path = dir.file("labels.tsv");
    write_file(path,
               "# user region party tier\n"
               "10\tR1\tRed\tmember\n"
               "11\tR1\tBlue\tmember\n"
               "12\tR1\tRed\tsupporter\n");
    auto ls = ingest_labels(path);
    CHECK(ls.size() == 3);
    CHECK(ls.regions() == std::vector<std::string>{"R1"});
    CHECK(ls.label(12)->tier == Tier::Supporter);

    const auto out = dir.file("export.tsv");
    write_file(out, export_labels(ls));
    auto again = ingest_labels(out);
    CHECK(export_labels(again) == export_labels(ls));
}

TEST_CASE("catalog file pins party order and colors", "[labels]") {
    testutil::TempDir dir;
    const auto cat = dir.file("catalog.tsv");
    write_file(cat, "R1\tBlue\t#0000ff\nR1\tRed\t#ff0000\n");
    const auto labels = dir.file("labels.tsv");
    write_file(labels, "5\tR1\tRed\tmember\n");
    auto ls = ingest_labels(labels, cat);
    // Catalog order wins: Blue is class 0 even though Red appears first.
    CHECK(ls.label(5)->party == 1);
    CHECK(ls.parties("R1")[0].color == "#0000ff");
    CHECK(export_catalog(ls) == "R1\tBlue\t#0000ff\nR1\tRed\t#ff0000\n");

    write_file(labels, "5\tR1\tGreen\tmember\n");
    CHECK_THROWS_AS(ingest_labels(labels, cat), DataError);
}

TEST_CASE("label files reject malformed rows", "[labels]") {
    testutil::TempDir dir;
    auto expect_bad = [&](const std::string& body) {
        const auto path = dir.file("bad.tsv");
        write_file(path, body);
        CHECK_THROWS_AS(ingest_labels(path), DataError);
    };
    expect_bad("1\tR1\tRed\n");                  // missing tier
    expect_bad("x\tR1\tRed\tmember\n");          // bad id
    expect_bad("1\tR1\tRed\tenthusiast\n");      // unknown tier
    expect_bad("1\tR1\tRed\tmember\n1\tR1\tRed\tmember\n");  // duplicate
    CHECK_THROWS_AS(ingest_labels(dir.file("absent.tsv")), DataError);

    const auto badcat = dir.file("cat.tsv");
    write_file(badcat, "R1\tRed\n");
    CHECK_THROWS_AS(load_catalog(badcat), DataError);
}
