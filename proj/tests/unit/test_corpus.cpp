#include <doctest.h>

#include <sstream>

#include "hatescope/corpus.hpp"

using namespace hatescope;

namespace {

const char* kHeader =
    "city_key,aliases,hate_crimes,pct_white,pct_black,pct_asian,pct_hispanic_latino,pct_foreign_born,"
    "pct_female,pct_age_18_64,population_density,median_income\n";

std::string row(const std::string& key, const std::string& aliases, const std::string& crimes = "10",
                const std::string& female = "51") {
    return key + ",\"" + aliases + "\"," + crimes + ",60,20,5,15,12," + female + ",63,3000,52000\n";
}

CityRegistry small_registry() {
    std::istringstream in(std::string(kHeader) + row("phoenix-az", "Phoenix, AZ|Phoenix", "566") +
                          row("new-york-ny", "New York, NY|New York City, NY") +
                          row("mumbai-x", "Mumbai|Bombay"));
    auto load = load_city_registry(in);
    REQUIRE(load.errors.empty());
    return load.registry;
}

std::string record(const std::string& id, const std::string& place, const std::string& ts = "2017-06-01T10:00:00Z",
                   const std::string& text = "some text") {
    return "{\"id\":\"" + id + "\",\"text\":\"" + text + "\",\"created_at\":\"" + ts + "\",\"place\":\"" + place +
           "\",\"user_id\":\"u1\"}";
}

}  // namespace

TEST_SUITE("corpus") {
    TEST_CASE("registry rows load with their counts") {
        auto reg = small_registry();
        REQUIRE(reg.size() == 3);
        CHECK(reg.find("phoenix-az")->hate_crime_count == 566);
        CHECK(reg.find_by_alias("  phoenix,   az ")->city_key == "phoenix-az");
    }

    TEST_CASE("registry rejects invariant violations and duplicates") {
        std::istringstream in(std::string(kHeader) + row("a", "A", "1", "120") + row("b", "B") + row("b", "B2") +
                              row("c", "C", "-1"));
        auto load = load_city_registry(in);
        CHECK(load.registry.size() == 1);
        REQUIRE(load.errors.size() == 3);
        CHECK(load.errors[0].line == 2);
        CHECK(load.errors[0].reason.find("pct_female") != std::string::npos);
        CHECK(load.errors[1].reason.find("duplicate") != std::string::npos);
        CHECK(load.errors[2].reason.find("hate_crimes") != std::string::npos);
    }

    TEST_CASE("missing required column is a hard failure") {
        std::istringstream in("city_key,aliases\nx,X\n");
        CHECK_THROWS_AS(load_city_registry(in), InputError);
    }

    TEST_CASE("ambiguous aliases are dropped from both cities") {
        std::istringstream in(std::string(kHeader) + row("springfield-il", "Springfield|Springfield, IL") +
                              row("springfield-ma", "Springfield|Springfield, MA"));
        auto load = load_city_registry(in);
        CHECK(load.registry.size() == 2);
        CHECK(load.registry.find_by_alias("Springfield") == nullptr);
        CHECK(load.registry.find_by_alias("Springfield, MA")->city_key == "springfield-ma");
    }

    TEST_CASE("ingest assigns, skips and rejects") {
        auto reg = small_registry();
        std::vector<std::string> lines = {
            record("1", "Phoenix, AZ"),
            record("2", "Atlantis"),
            "{not json",
            record("1", "Phoenix"),
            record("3", "Bombay"),
            record("4", "Mumbai"),
            record("5", "Phoenix", "2030-01-01T00:00:00Z"),
            "{\"id\":\"6\",\"text\":\"   \",\"created_at\":\"2017-06-01T10:00:00Z\",\"place\":\"Phoenix\",\"user_id\":\"u\"}",
        };
        IngestOptions opt;
        opt.window_start = *parse_rfc3339("2014-01-01T00:00:00Z");
        opt.window_end = *parse_rfc3339("2019-12-31T23:59:59Z");
        auto res = ingest_lines(lines, reg, opt);
        CHECK(res.total_lines == 8);
        CHECK(res.matched == 3);
        CHECK(res.unmatched == 1);
        CHECK(res.out_of_window == 1);
        CHECK(res.rejected == 3);
        CHECK(res.matched + res.unmatched + res.out_of_window + res.rejected == res.total_lines);
        REQUIRE(res.records.size() == 3);
        CHECK(res.records[0].city_key == "phoenix-az");
        // old and new names of a renamed city map to one key
        CHECK(res.records[1].city_key == "mumbai-x");
        CHECK(res.records[2].city_key == "mumbai-x");
        REQUIRE(res.rejects.size() == 3);
        CHECK(res.rejects[0].line == 3);
        CHECK(res.rejects[1].line == 4);
        CHECK(res.rejects[1].reason.find("duplicate") != std::string::npos);
        CHECK(res.rejects[2].line == 8);
    }

    TEST_CASE("alias closure") {
        auto reg = small_registry();
        std::vector<std::string> lines;
        std::vector<std::string> expected;
        int id = 0;
        for (const auto& city : reg.cities())
            for (const auto& alias : city.aliases) {
                lines.push_back(record(std::to_string(id++), alias));
                expected.push_back(city.city_key);
            }
        auto res = ingest_lines(lines, reg);
        REQUIRE(res.records.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) CHECK(res.records[i].city_key == expected[i]);
    }

    TEST_CASE("partition holds for random line soup and serial equals parallel") {
        auto reg = small_registry();
        Rng rng(11);
        const std::vector<std::string> places = {"Phoenix", "New York, NY", "Nowhere", "Bombay", "mumbai"};
        std::vector<std::string> lines;
        for (int i = 0; i < 2000; ++i) {
            const auto kind = rng.below(6);
            const std::string id = std::to_string(rng.below(1500));
            if (kind == 0) lines.push_back("garbage " + id);
            else if (kind == 1) lines.push_back(record(id, places[rng.below(places.size())], "2001-01-01T00:00:00Z"));
            else lines.push_back(record(id, places[rng.below(places.size())]));
        }
        IngestOptions opt;
        opt.window_start = *parse_rfc3339("2010-01-01T00:00:00Z");
        auto a = ingest_lines(lines, reg, opt, Exec::parallel);
        auto b = ingest_lines(lines, reg, opt, Exec::serial);
        CHECK(a.matched + a.unmatched + a.out_of_window + a.rejected == lines.size());
        CHECK(a.records.size() == a.matched);
        CHECK(serialize_ingest(a) == serialize_ingest(b));
        CHECK(serialize_rejects(a) == serialize_rejects(b));
    }

    TEST_CASE("ingest is idempotent") {
        auto reg = small_registry();
        std::vector<std::string> lines = {record("1", "Phoenix"), record("2", "New York City, NY")};
        CHECK(serialize_ingest(ingest_lines(lines, reg)) == serialize_ingest(ingest_lines(lines, reg)));
    }

    TEST_CASE("record accepts a place object") {
        auto r = parse_record_line(
            R"({"id":7,"text":"hi","created_at":"2017-01-01T00:00:00Z","place":{"full_name":"Phoenix, AZ"},"user_id":"9"})");
        CHECK(r.id == "7");
        CHECK(r.place_name == "Phoenix, AZ");
        CHECK_THROWS_AS(parse_record_line(R"({"id":"1","text":"x","created_at":"bad","place":"p","user_id":"u"})"),
                        InputError);
    }

    TEST_CASE("classified records round-trip through JSON") {
        ClassifiedRecord r;
        r.record = parse_record_line(record("9", "Phoenix"));
        r.city_key = "phoenix-az";
        r.score = 0.123456789;
        r.discrimination = true;
        r.self_narration = false;
        r.is_bot = true;
        auto back = classified_from_json(classified_to_json(r));
        CHECK(back.record.id == "9");
        CHECK(back.city_key == "phoenix-az");
        CHECK(back.score == r.score);
        CHECK(back.discrimination);
        REQUIRE(back.self_narration.has_value());
        CHECK_FALSE(*back.self_narration);
        CHECK(back.is_bot);
    }
}
