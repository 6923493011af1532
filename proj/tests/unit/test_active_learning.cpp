#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hatescope/active_learning.hpp"
#include "hatescope/fixture.hpp"

using namespace hatescope;

namespace {

std::vector<ScoredRecord> random_pool(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ScoredRecord> pool;
    for (std::size_t i = 0; i < n; ++i)
        pool.push_back({"r" + std::to_string(i), "", static_cast<double>(rng.below(1000)) / 1000.0});
    return pool;
}

ActiveConfig quick_config() {
    ActiveConfig c;
    c.train.ngrams.buckets = 1u << 14;
    c.k = 3;
    c.fraction = 0.05;
    c.max_iterations = 3;
    return c;
}

struct FixtureParts {
    std::vector<LabeledExample> initial;
    std::vector<PoolRecord> pool;
    std::unordered_map<std::string, int> answers;
};

FixtureParts small_parts() {
    PlantedCorpusOptions opt;
    opt.records = 600;
    opt.positive_rate = 0.2;
    auto corpus = planted_corpus(opt);
    FixtureParts p;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (i < 200) {
            p.initial.push_back(corpus[i]);
        } else {
            p.pool.push_back({corpus[i].id, corpus[i].text});
            p.answers[corpus[i].id] = corpus[i].label;
        }
    }
    return p;
}

class CountingSource : public LabelSource {
public:
    std::optional<int> label(const ScoredRecord&) override {
        ++calls;
        return std::nullopt;
    }
    int calls = 0;
};

}  // namespace

TEST_SUITE("active_learning") {
    TEST_CASE("quota is the ceiling of the fraction") {
        CHECK(boundary_quota(10000, 0.05) == 500);
        CHECK(boundary_quota(10001, 0.05) == 501);
        CHECK(boundary_quota(1, 0.05) == 1);
        CHECK(boundary_quota(0, 0.05) == 0);
        CHECK(boundary_quota(100, 0.1) == 10);
    }

    TEST_CASE("10000 pool gives 500 + 500") {
        auto pool = random_pool(10000, 1);
        auto b = sample_boundary(pool, 0.5, 0.05);
        CHECK(b.below.size() == 500);
        CHECK(b.above.size() == 500);
        CHECK(b.warnings.empty());
    }

    TEST_CASE("selection equals full-sort oracle per side") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto pool = random_pool(997, seed);
            const double t = 0.3 + 0.02 * static_cast<double>(seed);
            auto b = sample_boundary(pool, t, 0.07);
            std::vector<ScoredRecord> below, above;
            for (const auto& r : pool) (r.score < t ? below : above).push_back(r);
            auto by_distance = [t](const ScoredRecord& a, const ScoredRecord& c) {
                const double da = std::abs(a.score - t), dc = std::abs(c.score - t);
                return da != dc ? da < dc : a.id < c.id;
            };
            std::sort(below.begin(), below.end(), by_distance);
            std::sort(above.begin(), above.end(), by_distance);
            const std::size_t q = static_cast<std::size_t>(std::ceil(0.07 * 997));
            below.resize(std::min(q, below.size()));
            above.resize(std::min(q, above.size()));
            REQUIRE(b.below.size() == below.size());
            REQUIRE(b.above.size() == above.size());
            for (std::size_t i = 0; i < below.size(); ++i) CHECK(b.below[i].id == below[i].id);
            for (std::size_t i = 0; i < above.size(); ++i) CHECK(b.above[i].id == above[i].id);
            std::set<std::string> ids;
            for (const auto& r : b.below) ids.insert(r.id);
            for (const auto& r : b.above) CHECK(ids.count(r.id) == 0);
        }
    }

    TEST_CASE("one-sided pool warns") {
        std::vector<ScoredRecord> pool;
        for (int i = 0; i < 100; ++i) pool.push_back({std::to_string(i), "", 0.001 * i});
        auto b = sample_boundary(pool, 0.9, 0.05);
        CHECK(b.above.empty());
        CHECK(b.below.size() == 5);
        CHECK_FALSE(b.warnings.empty());
    }

    TEST_CASE("fraction must lie in (0, 0.5)") {
        auto pool = random_pool(10, 1);
        CHECK_THROWS_AS(sample_boundary(pool, 0.5, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(sample_boundary(pool, 0.5, 0.5), std::invalid_argument);
    }

    TEST_CASE("infinite epsilon runs one labeling round") {
        auto p = small_parts();
        FixtureLabelSource src(p.answers);
        auto cfg = quick_config();
        cfg.epsilon = std::numeric_limits<double>::infinity();
        auto r = run_active_loop(p.initial, p.pool, src, cfg);
        CHECK(r.rounds == 1);
        CHECK(r.history.size() == 2);
        CHECK(r.status == "plateau");
    }

    TEST_CASE("loop bookkeeping") {
        auto p = small_parts();
        FixtureLabelSource src(p.answers);
        auto cfg = quick_config();
        cfg.epsilon = -1;  // never plateau
        auto r = run_active_loop(p.initial, p.pool, src, cfg);
        CHECK(r.status == "max-iterations");
        CHECK(r.rounds == cfg.max_iterations);
        REQUIRE(r.history.size() == static_cast<std::size_t>(cfg.max_iterations + 1));
        for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i].train_size > r.history[i - 1].train_size);
        CHECK(r.history.back().train_size == r.training_set.size());
        std::set<std::string> ids;
        for (const auto& e : r.training_set) {
            CHECK(ids.insert(e.id).second);
            if (e.provenance == Provenance::active_learning) {
                CHECK(e.iteration >= 1);
                CHECK(e.iteration <= cfg.max_iterations);
                CHECK(e.label == p.answers.at(e.id));
            }
        }
        CHECK(r.training_set.size() == p.initial.size() + r.rounds * 0 + (r.training_set.size() - p.initial.size()));
    }

    TEST_CASE("loop is deterministic") {
        auto p = small_parts();
        FixtureLabelSource a(p.answers), b(p.answers);
        auto cfg = quick_config();
        auto ra = run_active_loop(p.initial, p.pool, a, cfg, Exec::parallel);
        auto rb = run_active_loop(p.initial, p.pool, b, cfg, Exec::serial);
        CHECK(history_csv(ra.history) == history_csv(rb.history));
        CHECK(serialize_labeled_examples(ra.training_set) == serialize_labeled_examples(rb.training_set));
        CHECK(serialize_model(ra.model) == serialize_model(rb.model));
    }

    TEST_CASE("empty label source stops label-starved") {
        auto p = small_parts();
        CountingSource src;
        auto r = run_active_loop(p.initial, p.pool, src, quick_config());
        CHECK(r.status == "label-starved");
        CHECK(r.rounds == 0);
        CHECK(src.calls > 0);
        CHECK(r.training_set.size() == p.initial.size());
    }

    TEST_CASE("exhausted pool stops") {
        auto p = small_parts();
        p.pool.resize(10);
        FixtureLabelSource src(p.answers);
        auto cfg = quick_config();
        cfg.epsilon = -1;
        cfg.fraction = 0.45;
        cfg.max_iterations = 10;
        auto r = run_active_loop(p.initial, p.pool, src, cfg);
        CHECK(r.status == "pool-exhausted");
        CHECK(r.rounds <= cfg.max_iterations);
    }

    TEST_CASE("replication metadata records the reported composition") {
        auto j = replication_metadata_json();
        CHECK(j.find("17000") != std::string::npos);
        CHECK(j.find("1987") != std::string::npos);
        CHECK(j.find("15013") != std::string::npos);
        CHECK(j.find("0.623") != std::string::npos);
    }
}
