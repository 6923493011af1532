// Serial vs OpenMP timings for the record-parallel kernels and stepwise candidate fits.
// Usage: hatescope_bench [records]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include <omp.h>

#include "hatescope/fixture.hpp"
#include "hatescope/kernels.hpp"
#include "hatescope/lexical.hpp"
#include "hatescope/stats.hpp"

using namespace hatescope;

namespace {

double time_it(const std::function<void()>& fn, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, const std::function<void(Exec)>& fn) {
    const double s = time_it([&] { fn(Exec::serial); });
    const double p = time_it([&] { fn(Exec::parallel); });
    std::printf("%-22s serial %9.4fs  parallel %9.4fs  speedup %5.2fx\n", name, s, p, s / p);
}

DesignMatrix nb_design(std::size_t n, std::size_t p) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> norm(0, 1);
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    std::vector<std::string> names;
    std::vector<double> y(n);
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) {
        double eta = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
            cols[j][i] = norm(gen);
            if (j < 3) eta += 0.3 * cols[j][i];
        }
        std::gamma_distribution<double> g(2.0, std::exp(eta) / 2.0);
        std::poisson_distribution<long long> pois(g(gen));
        y[i] = static_cast<double>(pois(gen));
    }
    return make_design(names, cols, y);
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? static_cast<std::size_t>(std::atoll(argv[1])) : 50000;
    std::printf("records %zu, OpenMP threads %d\n", n, omp_get_max_threads());

    Rng rng(1);
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) texts.push_back(filler_text(rng, 8 + static_cast<int>(rng.below(20))) + " they my");

    NgramConfig ngrams;
    ngrams.buckets = 1u << 18;
    PlantedCorpusOptions po;
    po.records = 2000;
    TrainConfig tc;
    tc.ngrams = ngrams;
    const ClassifierModel model = train(planted_corpus(po), tc);
    std::istringstream cats(core_categories_text());
    const CategoryScorer scorer(load_categories(cats));

    row("featurize", [&](Exec e) { featurize_batch(texts, ngrams, e); });
    row("score", [&](Exec e) { score_batch(model, texts, e); });
    row("category profiles", [&](Exec e) { profile_batch(scorer, texts, e); });
    row("pronoun counts", [&](Exec e) { pronoun_batch(texts, PronounLists{}, e); });
    const DesignMatrix d = nb_design(3000, 12);
    row("stepwise (n=3000,p=12)", [&](Exec e) { stepwise_backward(d, {}, e); });
    return 0;
}
