#include <doctest.h>

#include <string>

#include "blacklist.hpp"
#include "error.hpp"

using namespace dexpatch;

TEST_CASE("blacklist accepts the default policy shape") {
    Blacklist bl = parse_blacklist(
        "# Methods whose call sites are redirected to generated stubs.\n"
        "Landroid/telephony/TelephonyManager;->getDeviceId()Ljava/lang/String;\n");
    REQUIRE(bl.entries.size() == 1);
    CHECK(bl.entries[0].line == 2);
    CHECK(bl.entries[0].descriptor.canonical() ==
          "Landroid/telephony/TelephonyManager;->getDeviceId()Ljava/lang/String;");
    CHECK(bl.warnings.empty());
    CHECK(bl.descriptors().size() == 1);
}

TEST_CASE("comments, blanks, whitespace, and crlf are tolerated") {
    Blacklist bl = parse_blacklist(
        "\n"
        "  # indented comment\r\n"
        "  La/A;->m()V  \r\n"
        "\t\n"
        "La/A;->n(I)J   # trailing comment\n");
    REQUIRE(bl.entries.size() == 2);
    CHECK(bl.entries[0].descriptor.canonical() == "La/A;->m()V");
    CHECK(bl.entries[0].line == 3);
    CHECK(bl.entries[1].descriptor.canonical() == "La/A;->n(I)J");
    CHECK(bl.entries[1].line == 5);
}

TEST_CASE("missing trailing newline still parses the last entry") {
    Blacklist bl = parse_blacklist("La/A;->m()V");
    REQUIRE(bl.entries.size() == 1);
    CHECK(bl.entries[0].descriptor.name == "m");
}

TEST_CASE("duplicates collapse with a warning") {
    Blacklist bl = parse_blacklist(
        "La/A;->m()V\n"
        "La/B;->n()V\n"
        "La/A;->m()V\n");
    REQUIRE(bl.entries.size() == 2);
    CHECK(bl.entries[0].descriptor.class_descriptor == "La/A;");
    CHECK(bl.entries[1].descriptor.class_descriptor == "La/B;");
    REQUIRE(bl.warnings.size() == 1);
    CHECK(bl.warnings[0].find("line 3") != std::string::npos);
    CHECK(bl.warnings[0].find("duplicate") != std::string::npos);
}

TEST_CASE("syntax errors carry line number and caret") {
    try {
        parse_blacklist(
            "La/A;->m()V\n"
            "La/B;no_arrow()V\n");
        FAIL("expected DexError");
    } catch (const DexError& e) {
        CHECK(e.code() == Errc::BlacklistSyntax);
        std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("La/B;no_arrow()V") != std::string::npos);
        CHECK(msg.find('^') != std::string::npos);
    }

    CHECK_THROWS_AS(parse_blacklist("La/A;->m(Q)V\n"), DexError);
    CHECK_THROWS_AS(parse_blacklist("La/A;->()V\n"), DexError);
    CHECK_THROWS_AS(parse_blacklist("not a descriptor at all\n"), DexError);
}

TEST_CASE("empty input and comment-only input give an empty blacklist") {
    CHECK(parse_blacklist("").entries.empty());
    CHECK(parse_blacklist("# nothing here\n# still nothing\n").entries.empty());
    CHECK(parse_blacklist("\n\n\n").entries.empty());
}
