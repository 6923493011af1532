#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "checks.hpp"
#include "hatescope/classifier.hpp"
#include "hatescope/fixture.hpp"
#include "oracles.hpp"

using namespace hatescope;

namespace {

TrainConfig small_config() {
    TrainConfig c;
    c.ngrams.buckets = 1u << 16;
    return c;
}

std::vector<double> scores_of(const ClassifierModel& m, const std::vector<LabeledExample>& ex) {
    std::vector<double> s;
    for (const auto& e : ex) s.push_back(m.predict(e.text));
    return s;
}

std::vector<int> labels_of(const std::vector<LabeledExample>& ex) {
    std::vector<int> y;
    for (const auto& e : ex) y.push_back(e.label);
    return y;
}

}  // namespace

TEST_SUITE("classifier") {
    TEST_CASE("featurize counts n-grams per order") {
        NgramConfig cfg;
        auto f = featurize("most racist person", cfg);
        CHECK(f.size() == 6);
        CHECK(f == featurize("Most  racist PERSON!", cfg));
        CHECK(featurize("", cfg).empty());
        std::vector<std::string> tri = {"most", "racist", "person"};
        CHECK(std::count(f.begin(), f.end(), ngram_bucket(tri, cfg.buckets)) == 1);
        for (auto id : f) CHECK(id < cfg.buckets);
    }

    TEST_CASE("n-gram config validation") {
        NgramConfig bad;
        bad.buckets = 1000;
        CHECK_THROWS(validate(bad));
        NgramConfig bad_order;
        bad_order.orders = {4};
        CHECK_THROWS(validate(bad_order));
    }

    TEST_CASE("separable corpus is learned") {
        PlantedCorpusOptions opt;
        opt.records = 1000;
        auto corpus = planted_corpus(opt);
        auto cfg = small_config();
        cfg.epochs = 40;
        auto model = train(corpus, cfg);
        auto s = scores_of(model, corpus);
        auto y = labels_of(corpus);
        CHECK(metrics_at(s, y, model.threshold).f1 >= 0.99);
        for (std::size_t i = 0; i < corpus.size(); ++i)
            if (y[i]) CHECK(s[i] > 0.9);
    }

    TEST_CASE("no-signal corpus scores near the prior") {
        std::vector<LabeledExample> ex;
        for (int i = 0; i < 400; ++i) ex.push_back({std::to_string(i), "the same words every time", i % 4 == 0 ? 1 : 0});
        auto m = train(ex, small_config());
        CHECK(std::abs(m.predict("the same words every time") - 0.25) <= 0.05);
    }

    TEST_CASE("training is deterministic and rejects one class") {
        PlantedCorpusOptions opt;
        opt.records = 300;
        auto corpus = planted_corpus(opt);
        auto a = train(corpus, small_config()), b = train(corpus, small_config());
        CHECK(serialize_model(a) == serialize_model(b));
        for (auto& e : corpus) e.label = 0;
        CHECK_THROWS_WITH_AS(train(corpus, small_config()), "degenerate labels", std::invalid_argument);
    }

    TEST_CASE("empty text scores sigmoid(bias)") {
        Rng rng(1);
        auto m = checks::random_model(64, 4, rng);
        CHECK(m.predict("") == doctest::Approx(1 / (1 + std::exp(-m.bias))).epsilon(1e-15));
    }

    TEST_CASE("threshold is inclusive") {
        ClassifierModel m;
        m.threshold = 0.623;
        CHECK(m.classify(0.623));
        CHECK_FALSE(m.classify(0.6229999));
    }

    TEST_CASE("gradients match finite differences") {
        Rng rng(99);
        for (int trial = 0; trial < 50; ++trial) {
            auto m = checks::random_model(64, 4, rng);
            FeatureVector f;
            const auto len = 1 + rng.below(8);
            for (std::size_t i = 0; i < len; ++i) f.push_back(static_cast<std::uint32_t>(rng.below(64)));
            CHECK(checks::gradient_rel_error(m, f, static_cast<int>(rng.below(2))) <= 1e-4);
        }
    }

    TEST_CASE("model serialization round-trips") {
        PlantedCorpusOptions opt;
        opt.records = 200;
        TrainConfig cfg = small_config();
        cfg.ngrams.buckets = 1u << 10;
        auto m = train(planted_corpus(opt), cfg);
        auto back = deserialize_model(serialize_model(m));
        CHECK(back.embeddings == m.embeddings);
        CHECK(back.output == m.output);
        CHECK(back.bias == m.bias);
        CHECK(back.threshold == m.threshold);
        CHECK(back.ngrams.orders == m.ngrams.orders);
        CHECK_THROWS(deserialize_model("XXXX"));
    }

    TEST_CASE("AUC matches pairwise concordance") {
        Rng rng(4);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> s;
            std::vector<int> y;
            for (int i = 0; i < 200; ++i) {
                s.push_back(static_cast<double>(rng.below(50)) / 50.0);  // many ties
                y.push_back(static_cast<int>(rng.below(2)));
            }
            y[0] = 1;
            y[1] = 0;
            CHECK(auc(s, y) == oracle::auc_pairwise(s, y));
        }
    }

    TEST_CASE("perfect scorer") {
        std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
        std::vector<int> y = {0, 0, 1, 1};
        CHECK(auc(s, y) == 1.0);
        CHECK(metrics_at(s, y, 0.5).f1 == 1.0);
    }

    TEST_CASE("threshold tie-break returns the smallest maximizer") {
        std::vector<std::pair<double, int>> sc = {{0.7, 1}, {0.9, 1}, {0.3, 0}, {0.1, 0}};
        CHECK(select_threshold(sc) == 0.301);
    }

    TEST_CASE("threshold matches the grid oracle") {
        Rng rng(8);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::pair<double, int>> sc;
            std::vector<double> s;
            std::vector<int> y;
            for (int i = 0; i < 100; ++i) {
                s.push_back(rng.uniform());
                y.push_back(rng.uniform() < s.back() ? 1 : 0);
                sc.push_back({s.back(), y.back()});
            }
            y[0] = 1, y[1] = 0;
            sc[0].second = 1, sc[1].second = 0;
            CHECK(select_threshold(sc) == oracle::grid_threshold(s, y));
        }
    }

    TEST_CASE("raising the threshold never adds positives") {
        Rng rng(2);
        std::vector<double> s(300);
        std::vector<int> y(300);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = rng.uniform(), y[i] = static_cast<int>(rng.below(2));
        std::size_t prev = s.size() + 1;
        for (int i = 0; i <= 1000; ++i) {
            auto c = confusion_at(s, y, i / 1000.0);
            CHECK(c.total() == s.size());
            CHECK(c.tp + c.fp <= prev);
            prev = c.tp + c.fp;
        }
    }

    TEST_CASE("stratified folds partition the examples") {
        std::vector<int> y(100, 0);
        for (int i = 0; i < 37; ++i) y[i * 2] = 1;
        auto fold = stratified_folds(y, 10, 3);
        std::vector<int> size(10), pos(10), neg(10);
        for (std::size_t i = 0; i < y.size(); ++i) {
            REQUIRE(fold[i] >= 0);
            REQUIRE(fold[i] < 10);
            ++size[fold[i]];
            ++(y[i] ? pos : neg)[fold[i]];
        }
        CHECK(*std::max_element(size.begin(), size.end()) == 10);
        CHECK(*std::min_element(size.begin(), size.end()) == 10);
        CHECK(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()) <= 1);
        CHECK(*std::max_element(neg.begin(), neg.end()) - *std::min_element(neg.begin(), neg.end()) <= 1);
        CHECK_THROWS(stratified_folds(y, 1, 0));
        std::vector<int> few = {1, 1, 0, 0, 0};
        CHECK_THROWS(stratified_folds(few, 3, 0));
    }

    TEST_CASE("k-fold report is self-consistent") {
        PlantedCorpusOptions opt;
        opt.records = 400;
        opt.positive_rate = 0.25;
        auto corpus = planted_corpus(opt);
        auto rep = kfold_evaluate(corpus, 5, small_config());
        CHECK(rep.folds.size() == 5);
        CHECK(rep.total.total() == corpus.size());
        for (const auto& m : rep.folds) {
            const double p = m.precision, r = m.recall;
            CHECK(m.f1 == doctest::Approx(p + r > 0 ? 2 * p * r / (p + r) : 0.0).epsilon(1e-12));
        }
        std::vector<std::pair<double, int>> pooled;
        for (std::size_t i = 0; i < corpus.size(); ++i) pooled.push_back({rep.out_of_fold_scores[i], corpus[i].label});
        CHECK(rep.threshold == select_threshold(pooled));
    }

    TEST_CASE("labeled examples csv round-trip") {
        auto dir = checks::temp_dir("labeled");
        std::vector<LabeledExample> ex = {{"a", "text, with comma", 1, 0.75, Provenance::crowd, 0},
                                          {"b", "other", 0, 1.0, Provenance::active_learning, 3}};
        write_file(dir / "ex.csv", serialize_labeled_examples(ex));
        auto back = load_labeled_examples(dir / "ex.csv");
        REQUIRE(back.size() == 2);
        CHECK(back[0].text == "text, with comma");
        CHECK(back[0].confidence == 0.75);
        CHECK(back[1].provenance == Provenance::active_learning);
        CHECK(back[1].iteration == 3);
    }
}
