#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hatescope/kernels.hpp"
#include "hatescope/lexical.hpp"
#include "hatescope/stats.hpp"
#include "hatescope/util.hpp"
#include "oracles.hpp"

using namespace hatescope;

namespace {

std::vector<CategoryLexicon> toy_categories() {
    return {{"violence", {"kill", "attack", "shoot up"}},
            {"money", {"cash", "rent", "pay"}},
            {"night", {"night", "late night", "dark"}}};
}

std::vector<std::string> names_of(const std::vector<CategoryLexicon>& cats) {
    std::vector<std::string> n;
    for (const auto& c : cats) n.push_back(c.name);
    return n;
}

}  // namespace

TEST_SUITE("lexical") {
    TEST_CASE("arithmetic example") {
        CategoryScorer s(toy_categories());
        auto p = s.score("they attack and kill one two three four five six");
        CHECK(p[0] == doctest::Approx(0.2));
        CHECK(p[1] == 0.0);
        auto empty = s.score("");
        CHECK(empty == CategoryProfile{0, 0, 0});
    }

    TEST_CASE("overlapping terms count covered tokens once") {
        CategoryScorer s(toy_categories());
        auto p = s.score("late night");
        CHECK(p[2] == 1.0);
    }

    TEST_CASE("a term shared by two categories counts for both") {
        CategoryScorer s({{"a", {"pay day"}}, {"b", {"pay"}}});
        auto p = s.score("pay day now x");
        CHECK(p[0] == 0.5);
        CHECK(p[1] == 0.25);
    }

    TEST_CASE("profiles match the naive oracle") {
        auto cats = toy_categories();
        CategoryScorer s(cats);
        std::vector<std::vector<std::vector<std::string>>> oracle_cats;
        for (const auto& c : cats) {
            std::vector<std::vector<std::string>> terms;
            for (const auto& t : c.terms) terms.push_back(oracle::simple_tokens(t));
            oracle_cats.push_back(terms);
        }
        const std::vector<std::string> vocab = {"kill", "attack", "shoot", "up", "cash", "rent", "pay", "night",
                                                "late", "dark", "the", "a", "Night!", "CASH,"};
        Rng rng(77);
        for (int t = 0; t < 300; ++t) {
            std::string text;
            const auto n = rng.below(20);
            for (std::size_t i = 0; i < n; ++i) text += vocab[rng.below(vocab.size())] + " ";
            auto got = s.score(text);
            auto want = oracle::naive_profile(oracle::simple_tokens(text), oracle_cats);
            for (std::size_t c = 0; c < got.size(); ++c) CHECK(got[c] == want[c]);
        }
    }

    TEST_CASE("duplicating a text leaves its profile unchanged") {
        CategoryScorer s(toy_categories());
        const std::string t = "pay the rent at night or they attack";
        CHECK(s.score(t + " " + t) == s.score(t));
    }

    TEST_CASE("group ratio examples") {
        auto names = names_of(toy_categories());
        std::vector<CategoryProfile> a = {{0.1, 0.2, 0.3}, {0.3, 0.0, 0.1}};
        auto same = group_ratio(a, a, names);
        for (const auto& r : same.ratio) CHECK(*r == 1.0);
        std::vector<CategoryProfile> b = {{0.2, 0.0, 0.1}};
        auto r = group_ratio(a, b, names);
        CHECK(*r.ratio[0] == doctest::Approx(1.0));
        CHECK_FALSE(r.ratio[1].has_value());
        CHECK(*r.ratio[2] == doctest::Approx(2.0));
        CHECK(r.defined == 2);
        CHECK(r.grand_mean == doctest::Approx(1.5));
        CHECK(group_ratio_csv(r).find("undefined") != std::string::npos);
        CHECK_THROWS_AS(group_ratio({}, b, names), std::invalid_argument);
    }

    TEST_CASE("group mean equals the mean of member profiles") {
        Rng rng(3);
        std::vector<CategoryProfile> ps;
        for (int i = 0; i < 101; ++i) ps.push_back({rng.uniform(), rng.uniform(), 0.0});
        ProfileAccumulator acc;
        for (const auto& p : ps) acc.add(p);
        auto m = acc.mean();
        long double sum = 0;
        for (const auto& p : ps) sum += p[0];
        CHECK(m[0] == doctest::Approx(static_cast<double>(sum / ps.size())).epsilon(1e-14));
        auto sharded = mean_profile_sharded(ps, 7);
        for (std::size_t c = 0; c < m.size(); ++c) CHECK(sharded[c] == doctest::Approx(m[c]).epsilon(1e-14));
    }

    TEST_CASE("volume buckets use 1, 2-21 and more than 21") {
        std::map<std::string, std::vector<CategoryProfile>> by_user;
        by_user["one"] = {{0.1, 0.2, 0.3}};
        by_user["mid"] = std::vector<CategoryProfile>(21, {0.1, 0.2, 0.3});
        by_user["heavy"] = std::vector<CategoryProfile>(22, {0.2, 0.4, 0.6});
        auto u = user_profiles(by_user);
        REQUIRE(u.buckets.size() == 3);
        CHECK(u.buckets[0].users == 1);
        CHECK(u.buckets[1].records == 21);
        CHECK(u.buckets[2].users == 1);
        REQUIRE(u.correlations.size() == 3);
        for (const auto& c : u.correlations) CHECK(*c.rho == doctest::Approx(1.0));
        CHECK(*u.correlations[0].rho == spearman(u.buckets[0].mean, u.buckets[1].mean).r);
    }

    TEST_CASE("empty buckets are omitted with a warning") {
        std::map<std::string, std::vector<CategoryProfile>> by_user;
        by_user["one"] = {{0.1, 0.2, 0.3}};
        auto u = user_profiles(by_user);
        CHECK(u.buckets.size() == 1);
        CHECK(u.warnings.size() == 2);
        CHECK(u.correlations.empty());
    }

    TEST_CASE("category file parsing") {
        std::istringstream in("# comment\nviolence: kill, Attack ,shoot up\nmoney:cash\n");
        auto cats = load_categories(in);
        REQUIRE(cats.size() == 2);
        CHECK(cats[0].terms == std::vector<std::string>{"kill", "attack", "shoot up"});
        std::istringstream dup("a:x\na:y\n");
        CHECK_THROWS_AS(load_categories(dup), InputError);
        CHECK_THROWS_AS(select_categories(cats, {"night"}), std::invalid_argument);
        CHECK(core_category_preset().size() == 9);
    }
}
