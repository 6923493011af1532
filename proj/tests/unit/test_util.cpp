#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hatescope/util.hpp"

using namespace hatescope;

TEST_SUITE("util") {
    TEST_CASE("fnv1a matches published test vectors") {
        CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
        CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
        CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
        CHECK(hex64(0xabcULL) == "0000000000000abc");
    }

    TEST_CASE("normalize_label trims, folds and collapses") {
        CHECK(normalize_label("  Phoenix,   AZ \t") == "phoenix, az");
        CHECK(normalize_label("") == "");
    }

    TEST_CASE("csv reader handles quotes, embedded newlines and header comments") {
        std::istringstream in("# hatescope 0.1.0 config=x\na,b\n\"x,1\",\"he said \"\"hi\"\"\"\n\"multi\nline\",2\n");
        CsvReader r(in);
        std::vector<std::string> row;
        REQUIRE(r.next(row));
        CHECK(row == std::vector<std::string>{"a", "b"});
        CHECK(r.line() == 2);
        REQUIRE(r.next(row));
        CHECK(row == std::vector<std::string>{"x,1", "he said \"hi\""});
        REQUIRE(r.next(row));
        CHECK(row == std::vector<std::string>{"multi\nline", "2"});
        CHECK(r.line() == 4);
        CHECK_FALSE(r.next(row));
    }

    TEST_CASE("csv_row round-trips through the reader") {
        std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "line\nbreak", ""};
        std::istringstream in(csv_row(fields) + "\n");
        CsvReader r(in);
        std::vector<std::string> row;
        REQUIRE(r.next(row));
        CHECK(row == fields);
    }

    TEST_CASE("CsvHeader reports the missing column") {
        CsvHeader h({"id", "text"});
        CHECK(h.at("text") == 1);
        CHECK_FALSE(h.find("label").has_value());
        CHECK_THROWS_AS(h.at("label"), InputError);
    }

    TEST_CASE("rfc3339 parsing") {
        CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == 0);
        CHECK(parse_rfc3339("2017-03-01T12:30:00Z") == 1488371400);
        CHECK(parse_rfc3339("2017-03-01T14:30:00+02:00") == 1488371400);
        CHECK_FALSE(parse_rfc3339("2017-13-01T00:00:00Z").has_value());
        CHECK_FALSE(parse_rfc3339("yesterday").has_value());
        CHECK(format_rfc3339(1488371400) == "2017-03-01T12:30:00Z");
        CHECK(utc_year(1488371400) == 2017);
    }

    TEST_CASE("format_double is round-trip exact") {
        for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) CHECK(std::stod(format_double(v)) == v);
        CHECK(format_double(std::nan("")) == "NA");
    }

    TEST_CASE("parse helpers reject junk") {
        CHECK(parse_bool("TRUE"));
        CHECK_FALSE(parse_bool("0"));
        CHECK_THROWS_AS(parse_bool("maybe"), InputError);
        CHECK(parse_double(" 2.5 ", "x") == 2.5);
        CHECK_THROWS_AS(parse_double("2.5x", "x"), InputError);
        CHECK(parse_int("42", "n") == 42);
        CHECK_THROWS_AS(parse_int("4.2", "n"), InputError);
    }

    TEST_CASE("Rng is a pure function of the seed") {
        Rng a(7), b(7);
        for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
        Rng c(3);
        for (int i = 0; i < 1000; ++i) {
            double u = c.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            CHECK(c.below(5) < 5);
        }
    }

    TEST_CASE("artifact header carries version and hash") {
        CHECK(artifact_header("abc") == "# hatescope 0.1.0 config=abc\n");
    }
}
