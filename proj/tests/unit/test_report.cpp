#include <doctest.h>

#include <json.hpp>

#include "hatescope/fixture.hpp"
#include "hatescope/report.hpp"

using namespace hatescope;

namespace {

CityRecord city(const std::string& key, long long crimes, bool coords = true) {
    CityRecord c;
    c.city_key = key;
    c.aliases = {key};
    c.hate_crime_count = crimes;
    c.census = {60, 10, 5, 20, 12, 51, 62, 3000, 55000};
    if (coords) {
        c.lat = 40.0;
        c.lon = -75.0;
    }
    return c;
}

ClassifiedRecord rec(const std::string& id, const std::string& user, const std::string& key, bool disc,
                     std::optional<bool> self = std::nullopt) {
    ClassifiedRecord r;
    r.record.id = id;
    r.record.user_id = user;
    r.record.text = "x";
    r.city_key = key;
    r.discrimination = disc;
    r.self_narration = self;
    return r;
}

}  // namespace

TEST_SUITE("report") {
    TEST_CASE("counts, rates and the partition identity") {
        CityRegistry reg;
        reg.add(city("a", 10));
        reg.add(city("empty", 3));
        std::vector<ClassifiedRecord> rs;
        for (int i = 0; i < 100; ++i) {
            const bool disc = i < 9;
            rs.push_back(rec(std::to_string(i), "u" + std::to_string(i % 4), "a", disc,
                             disc ? std::optional<bool>(i < 3) : std::nullopt));
        }
        auto aggs = aggregate_cities(rs, reg);
        REQUIRE(aggs.size() == 2);
        CHECK(aggs[0].discrimination_records == 9);
        CHECK(aggs[0].discrimination_rate == doctest::Approx(0.09));
        CHECK(1.0 - aggs[0].discrimination_rate == doctest::Approx(0.91));
        CHECK(aggs[0].targeted == 6);
        CHECK(aggs[0].self_narration == 3);
        CHECK(aggs[0].targeted + aggs[0].self_narration == aggs[0].discrimination_records);
        CHECK(aggs[0].unique_discrimination_users == 4);
        CHECK(*aggs[0].tweets_per_user == 2.25);
        CHECK(*aggs[0].targeted_self_ratio == 2.0);
        CHECK(aggs[1].total_records == 0);
        CHECK(aggs[1].discrimination_rate == 0.0);
        CHECK_FALSE(aggs[1].tweets_per_user.has_value());
        CHECK_FALSE(aggs[1].targeted_self_ratio.has_value());
        CHECK_NOTHROW(check_aggregates(aggs, rs));
        auto broken = aggs;
        broken[0].targeted += 1;
        CHECK_THROWS_AS(check_aggregates(broken, rs), InvariantError);
    }

    TEST_CASE("unknown city or missing delineation is an invariant violation") {
        CityRegistry reg;
        reg.add(city("a", 1));
        CHECK_THROWS_AS(aggregate_cities({rec("1", "u", "zz", false)}, reg), InvariantError);
        CHECK_THROWS_AS(aggregate_cities({rec("1", "u", "a", true)}, reg), InvariantError);
    }

    TEST_CASE("quartile classes split 25/50/25 with key-ordered ties") {
        std::vector<double> v;
        std::vector<std::string> k;
        for (int i = 0; i < 100; ++i) {
            v.push_back(i % 10);
            char buf[8];
            std::snprintf(buf, sizeof buf, "c%03d", i);
            k.push_back(buf);
        }
        auto q = quartile_classes(v, k);
        int low = 0, mid = 0, high = 0;
        for (auto c : q) ++(c == QuartileClass::low ? low : c == QuartileClass::high ? high : mid);
        CHECK(low == 25);
        CHECK(mid == 50);
        CHECK(high == 25);
        // value 2 has ten members (c002..c092); the first five by key are low
        CHECK(q[2] == QuartileClass::low);
        CHECK(q[42] == QuartileClass::low);
        CHECK(q[52] == QuartileClass::middle);
        CHECK(color_name(QuartileClass::high) == "red");
    }

    TEST_CASE("map marks underline and warns on missing coordinates") {
        CityRegistry reg;
        reg.add(city("a", 1));
        reg.add(city("b", 2, false));
        std::vector<CityAggregate> aggs(2);
        aggs[0].city_key = "a";
        aggs[0].targeted_proportion = 0.51;
        aggs[1].city_key = "b";
        aggs[1].targeted_proportion = 0.5;
        auto m = emit_map_data(aggs, reg);
        auto j = nlohmann::json::parse(m.geojson);
        CHECK(j["features"][0]["properties"]["underline"] == true);
        CHECK(j["features"][1]["properties"]["underline"] == false);
        CHECK(j["features"][1]["geometry"].is_null());
        REQUIRE(m.warnings.size() == 1);
        CHECK(m.warnings[0].find("b") != std::string::npos);
    }

    TEST_CASE("top feature is a planted n-gram") {
        PlantedCorpusOptions po;
        po.records = 1500;
        TrainConfig tc;
        tc.ngrams.buckets = 1u << 16;
        auto data = planted_corpus(po);
        auto model = train(data, tc);
        std::vector<ClassifiedRecord> rs;
        for (const auto& e : data) {
            ClassifiedRecord r;
            r.record.id = e.id;
            r.record.text = e.text;
            r.city_key = "a";
            r.discrimination = e.label == 1;
            r.self_narration = false;
            rs.push_back(r);
        }
        auto rep = top_features(model, rs, 5);
        REQUIRE(rep.top.size() == 5);
        bool planted = false;
        for (const auto& p : planted_phrases()) planted |= (" " + p + " ").find(" " + rep.top[0].label + " ") != std::string::npos;
        CHECK(planted);
        for (std::size_t i = 1; i < rep.top.size(); ++i) CHECK(rep.top[i - 1].contribution >= rep.top[i].contribution);
        CHECK_FALSE(rep.cities.empty());
    }

    TEST_CASE("regression design has twelve covariates") {
        std::vector<CityAggregate> aggs(20);
        for (std::size_t i = 0; i < aggs.size(); ++i) {
            aggs[i].city_key = "c" + std::to_string(i);
            aggs[i].total_records = 100;
            aggs[i].targeted = i;
            aggs[i].self_narration = i % 3;
            aggs[i].targeted_proportion = 0.5;
            aggs[i].targeted_self_ratio = i % 3 ? std::optional<double>(double(i) / double(i % 3)) : std::nullopt;
            aggs[i].hate_crime_count = static_cast<long long>(i);
        }
        auto d = regression_design(aggs, SocialCovariate::proportion);
        CHECK(d.cols() == 13);
        CHECK(d.rows() == 20);
        CHECK(d.x(3, 1) == 3.0);
        auto r = regression_design(aggs, SocialCovariate::ratio, {"c1"});
        CHECK(r.rows() == 12);
    }

    TEST_CASE("aggregates CSV round-trips") {
        CityRegistry reg;
        reg.add(city("a", 10));
        reg.add(city("b", 0));
        std::vector<ClassifiedRecord> rs = {rec("1", "u", "a", true, true), rec("2", "u", "a", true, false),
                                            rec("3", "v", "b", false)};
        auto aggs = aggregate_cities(rs, reg);
        const auto csv = aggregates_csv(aggs);
        CHECK(aggregates_csv(load_aggregates_csv(csv)) == csv);
    }
}
