#pragma once

// Shared test procedures that exercise library code against the oracles.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hatescope/annotation.hpp"
#include "hatescope/classifier.hpp"
#include "hatescope/util.hpp"

namespace checks {

/// Random model with `buckets` rows of dimension `dim`, weights uniform in [-1, 1].
inline hatescope::ClassifierModel random_model(std::uint32_t buckets, int dim, hatescope::Rng& rng) {
    hatescope::ClassifierModel m;
    m.ngrams.buckets = buckets;
    m.dim = dim;
    m.embeddings.resize(std::size_t(buckets) * dim);
    for (auto& w : m.embeddings) w = rng.uniform(-1, 1);
    m.output.resize(dim);
    for (auto& w : m.output) w = rng.uniform(-1, 1);
    m.bias = rng.uniform(-1, 1);
    return m;
}

/// Largest relative error between the analytic gradient and central differences of
/// the loss over every parameter the example touches. The relative error uses
/// max(|a|, |b|, 1e-6) as the denominator.
inline double gradient_rel_error(const hatescope::ClassifierModel& model, const hatescope::FeatureVector& f, int label) {
    const double h = 1e-6;
    auto g = hatescope::example_gradient(model, f, label);
    hatescope::ClassifierModel m = model;
    double worst = 0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
    auto fd = [&](double& p) {
        const double saved = p;
        p = saved + h;
        const double up = hatescope::example_loss(m, f, label);
        p = saved - h;
        const double down = hatescope::example_loss(m, f, label);
        p = saved;
        return (up - down) / (2 * h);
    };
    for (int j = 0; j < m.dim; ++j) worst = std::max(worst, rel(g.output[j], fd(m.output[j])));
    worst = std::max(worst, rel(g.bias, fd(m.bias)));
    std::vector<std::uint32_t> rows(f.begin(), f.end());
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    for (auto r : rows) {
        const auto& analytic = g.rows.at(r);
        for (int j = 0; j < m.dim; ++j)
            worst = std::max(worst, rel(analytic[j], fd(m.embeddings[std::size_t(r) * m.dim + j])));
    }
    return worst;
}

/// Concatenated contents of every regular file under `root`, keyed by relative path.
inline std::string tree_digest(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), root));
    std::sort(files.begin(), files.end());
    std::string out;
    for (const auto& f : files) {
        out += "== " + f.generic_string() + "\n";
        out += hatescope::read_file(root / f);
    }
    return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hatescope_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Adds test tasks "g0".. (gold label 1) and regular tasks "t0"..
inline void add_gold_and_tasks(hatescope::AnnotationStore& store, int gold, int tasks) {
    for (int i = 0; i < gold; ++i) store.add_test_task("g" + std::to_string(i), "gold text " + std::to_string(i), 1);
    for (int i = 0; i < tasks; ++i) store.add_task("t" + std::to_string(i), "task text " + std::to_string(i));
}

/// Serves and answers test tasks for `annotator`: `correct` right answers, then `wrong` wrong ones.
inline void answer_gold(hatescope::AnnotationStore& store, const std::string& annotator, int correct, int wrong) {
    for (int i = 0; i < correct + wrong; ++i) {
        auto offer = store.next_task(annotator);
        if (offer.kind != hatescope::TaskOffer::Kind::task || offer.task_id[0] != 'g')
            throw std::runtime_error("expected a test task for " + annotator);
        store.submit({offer.task_id, annotator, i < correct ? 1 : 0, "t"});
    }
}

/// Serves the next task to `annotator` and checks it is `task`, then submits `label`.
inline hatescope::AggregatedLabel judge(hatescope::AnnotationStore& store, const std::string& annotator,
                                        const std::string& task, int label) {
    auto offer = store.next_task(annotator);
    if (offer.kind != hatescope::TaskOffer::Kind::task || offer.task_id != task)
        throw std::runtime_error(annotator + " was not served " + task);
    return store.submit({task, annotator, label, "t"});
}

}  // namespace checks
