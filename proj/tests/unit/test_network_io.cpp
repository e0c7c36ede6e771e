#include <catch_amalgamated.hpp>

#include <sstream>

#include "bankdyn/csv.hpp"
#include "bankdyn/error.hpp"
#include "bankdyn/netgen.hpp"
#include "bankdyn/network_io.hpp"

using namespace bankdyn;

namespace {

LoadResult parse(const std::string& holdings, const std::string& banks) {
    std::istringstream h(holdings), b(banks);
    return parse_network(h, b);
}

const std::string kBanks =
    "bank_id,equity,cash_minus_liability\n"
    "B1,5,\n"
    "B2,,-1.5\n";
const std::string kHoldings =
    "bank_id,asset_id,amount\n"
    "B1,GR,3\n"
    "B1,IT,1\n"
    "B2,IT,2\n";

}  // namespace

TEST_CASE("csv reader handles quotes, CRLF, BOM and blank lines") {
    std::istringstream in("\xEF\xBB\xBF" "a,b\r\n\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n,\n");
    csv::Reader r(in, "t");
    r.expect_header({"a", "b"});
    auto row = r.next();
    REQUIRE(row);
    CHECK(row->line == 3);
    CHECK(row->fields == std::vector<std::string>{"x,1", "say \"hi\""});
    row = r.next();
    REQUIRE(row);
    CHECK(row->fields == std::vector<std::string>{"", ""});
    CHECK_FALSE(r.next());
}

TEST_CASE("csv header mismatch and bad numbers report the line") {
    std::istringstream in("x,y\n");
    csv::Reader r(in, "t");
    CHECK_THROWS_AS(r.expect_header({"a", "b"}), ParseError);
    try {
        (void)csv::parse_double("1.5x", "t", 7);
        FAIL("no throw");
    } catch (const ParseError& e) {
        CHECK(e.line() == 7);
    }
    CHECK_THROWS_AS(csv::parse_double("", "t", 1), ParseError);
    CHECK_THROWS_AS(csv::parse_double("nan", "t", 1), ParseError);
    CHECK(csv::parse_double(" 2.5 ", "t", 1) == 2.5);
    CHECK(csv::parse_double("1e-3", "t", 1) == 1e-3);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5e17, 0.0}) {
        CHECK(csv::parse_double(csv::format_double(v), "t", 1) == v);
    }
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("plain") == "plain");
}

TEST_CASE("missing equity or cash is derived from the identity") {
    const auto r = parse(kHoldings, kBanks);
    const auto& net = r.network;
    REQUIRE(net.n_banks() == 2);
    CHECK(net.banks()[0].cash_minus_liability == 1.0);
    CHECK(net.banks()[1].equity0 == 0.5);
    CHECK(net.assets()[0].id == "GR");
    CHECK(net.assets()[1].id == "IT");
    CHECK(r.warnings.empty());
}

TEST_CASE("inconsistent equity and cash are rejected") {
    CHECK_THROWS_AS(parse(kHoldings, "bank_id,equity,cash_minus_liability\nB1,5,2\nB2,0.5,-1.5\n"),
                    ValidationError);
    CHECK_NOTHROW(parse(kHoldings, "bank_id,equity,cash_minus_liability\nB1,5,1\nB2,0.5,-1.5\n"));
}

TEST_CASE("network loader error paths") {
    SECTION("duplicate bank row") {
        CHECK_THROWS_AS(parse(kHoldings, kBanks + "B1,1,\n"), ValidationError);
    }
    SECTION("duplicate holding") {
        CHECK_THROWS_AS(parse(kHoldings + "B1,GR,1\n", kBanks), ValidationError);
    }
    SECTION("negative amount") {
        CHECK_THROWS_AS(parse(kHoldings + "B2,GR,-1\n", kBanks), ValidationError);
    }
    SECTION("holding of an unknown bank") {
        CHECK_THROWS_AS(parse(kHoldings + "B9,GR,1\n", kBanks), ValidationError);
    }
    SECTION("bad number carries its line") {
        try {
            (void)parse("bank_id,asset_id,amount\nB1,GR,3\nB1,IT,abc\n", kBanks);
            FAIL("no throw");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SECTION("wrong field count") {
        CHECK_THROWS_AS(parse("bank_id,asset_id,amount\nB1,GR\n", kBanks), ParseError);
    }
    SECTION("both equity fields empty") {
        CHECK_THROWS_AS(parse(kHoldings, "bank_id,equity,cash_minus_liability\nB1,,\n"),
                        ParseError);
    }
}

TEST_CASE("banks without equity or holdings are dropped with warnings") {
    const std::string banks = kBanks + "B3,-1,\nB4,2,\n";
    const std::string holdings = kHoldings + "B3,PT,4\n";
    const auto r = parse(holdings, banks);
    CHECK(r.network.n_banks() == 2);
    CHECK(r.dropped_banks == 2);
    // PT was held only by the dropped bank.
    CHECK(r.dropped_assets == 1);
    CHECK(r.network.n_assets() == 2);
    CHECK(r.warnings.size() >= 2);
}

TEST_CASE("save then load is bit-identical") {
    GenSpec spec;
    spec.n_banks = 30;
    spec.seed = 99;
    const auto net = generate(spec);
    std::ostringstream h, b;
    write_network(net, h, b);
    std::istringstream hi(h.str()), bi(b.str());
    const auto back = parse_network(hi, bi).network;
    CHECK(back.weights() == net.weights());
    for (std::size_t i = 0; i < net.n_banks(); ++i) {
        CHECK(back.banks()[i].id == net.banks()[i].id);
        CHECK(back.banks()[i].equity0 == net.banks()[i].equity0);
        CHECK(back.banks()[i].cash_minus_liability == net.banks()[i].cash_minus_liability);
    }
    std::ostringstream h2, b2;
    write_network(back, h2, b2);
    CHECK(h2.str() == h.str());
    CHECK(b2.str() == b.str());
}
