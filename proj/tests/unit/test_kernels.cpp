#include <doctest.h>

#include "hatescope/fixture.hpp"
#include "hatescope/kernels.hpp"
#include "hatescope/lexical.hpp"

using namespace hatescope;

namespace {

std::vector<std::string> texts(std::size_t n) {
    Rng rng(5);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(filler_text(rng, 5 + static_cast<int>(rng.below(20))) + " they my");
    return out;
}

}  // namespace

TEST_SUITE("kernels") {
    TEST_CASE("parallel kernels equal their serial references") {
        auto t = texts(3000);
        NgramConfig cfg;
        cfg.buckets = 1u << 12;
        CHECK(featurize_batch(t, cfg, Exec::parallel) == featurize_batch(t, cfg, Exec::serial));

        PlantedCorpusOptions opt;
        opt.records = 300;
        TrainConfig tc;
        tc.ngrams = cfg;
        auto model = train(planted_corpus(opt), tc);
        auto sp = score_batch(model, t, Exec::parallel);
        auto ss = score_batch(model, t, Exec::serial);
        CHECK(sp == ss);

        CategoryScorer scorer({{"work", {"job", "work", "office"}}, {"night", {"night", "late night"}}});
        CHECK(profile_batch(scorer, t, Exec::parallel) == profile_batch(scorer, t, Exec::serial));

        auto pp = pronoun_batch(t, PronounLists{}, Exec::parallel);
        auto ps = pronoun_batch(t, PronounLists{}, Exec::serial);
        REQUIRE(pp.size() == ps.size());
        for (std::size_t i = 0; i < pp.size(); ++i) {
            CHECK(pp[i].first == ps[i].first);
            CHECK(pp[i].third == ps[i].third);
        }
    }

    TEST_CASE("sharded mean is stable across shard counts") {
        auto t = texts(500);
        CategoryScorer scorer({{"work", {"job", "work"}}});
        auto profiles = profile_batch(scorer, t);
        auto one = mean_profile_sharded(profiles, 1);
        for (std::size_t s : {2u, 3u, 16u, 1000u})
            CHECK(mean_profile_sharded(profiles, s)[0] == doctest::Approx(one[0]).epsilon(1e-14));
        CHECK(mean_profile_sharded(profiles, 4) == mean_profile_sharded(profiles, 4));
    }
}
