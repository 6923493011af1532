#include "hatescope/active_learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "hatescope/kernels.hpp"

namespace hatescope {

std::size_t boundary_quota(std::size_t pool_size, double fraction) {
    return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pool_size) - 1e-9));
}

BoundaryBatch sample_boundary(const std::vector<ScoredRecord>& pool, double threshold, double fraction, int iteration) {
    if (!(fraction > 0 && fraction < 0.5)) throw std::invalid_argument("boundary fraction must lie in (0, 0.5)");
    BoundaryBatch batch;
    batch.iteration = iteration;
    const std::size_t quota = boundary_quota(pool.size(), fraction);
    for (const auto& r : pool) (r.score < threshold ? batch.below : batch.above).push_back(r);
    auto closer = [threshold](const ScoredRecord& a, const ScoredRecord& b) {
        const double da = std::abs(a.score - threshold), db = std::abs(b.score - threshold);
        if (da != db) return da < db;
        return a.id < b.id;
    };
    auto take = [&](std::vector<ScoredRecord>& side, const char* name) {
        if (side.size() < quota) {
            batch.warnings.push_back(std::string(name) + " side has " + std::to_string(side.size()) + " of " +
                                     std::to_string(quota) + " requested records");
        }
        const std::size_t n = std::min(quota, side.size());
        std::partial_sort(side.begin(), side.begin() + static_cast<std::ptrdiff_t>(n), side.end(), closer);
        side.resize(n);
    };
    take(batch.below, "below");
    take(batch.above, "above");
    return batch;
}

FixtureLabelSource FixtureLabelSource::from_csv(const std::filesystem::path& path) {
    std::unordered_map<std::string, int> labels;
    for (const auto& e : load_labeled_examples(path)) labels[e.id] = e.label;
    return FixtureLabelSource(std::move(labels));
}

std::optional<int> FixtureLabelSource::label(const ScoredRecord& record) {
    auto it = labels_.find(record.id);
    if (it == labels_.end()) return std::nullopt;
    return it->second;
}

ActiveResult run_active_loop(std::vector<LabeledExample> initial, std::vector<PoolRecord> pool, LabelSource& labels,
                             const ActiveConfig& config, Exec exec) {
    if (config.window < 2) throw std::invalid_argument("plateau window must be at least 2");
    if (config.max_iterations < 0) throw std::invalid_argument("max_iterations must be non-negative");

    ActiveResult result;
    result.training_set = std::move(initial);
    int flat = 0;  // consecutive evaluation pairs with F1 change below epsilon
    for (int it = 0;; ++it) {
        const EvalReport report = kfold_evaluate(result.training_set, config.k, config.train);
        TrainConfig tc = config.train;
        tc.threshold = report.threshold;
        result.model = train(result.training_set, tc);

        IterationRecord rec;
        rec.iteration = it;
        rec.train_size = result.training_set.size();
        for (const auto& e : result.training_set) rec.positives += e.label == 1;
        rec.mean_f1 = report.mean_f1;
        rec.mean_auc = report.mean_auc;
        rec.threshold = report.threshold;
        result.history.push_back(rec);

        if (it > 0) {
            const double gain = rec.mean_f1 - result.history[it - 1].mean_f1;
            flat = gain < config.epsilon ? flat + 1 : 0;
            if (flat >= config.window - 1) {
                result.status = "plateau";
                break;
            }
        }
        if (it >= config.max_iterations) {
            result.status = "max-iterations";
            break;
        }
        if (pool.empty()) {
            result.status = "pool-exhausted";
            break;
        }

        std::vector<std::string> texts;
        texts.reserve(pool.size());
        for (const auto& p : pool) texts.push_back(p.text);
        const auto scores = score_batch(result.model, texts, exec);
        std::vector<ScoredRecord> scored;
        scored.reserve(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) scored.push_back({pool[i].id, pool[i].text, scores[i]});

        const BoundaryBatch batch = sample_boundary(scored, report.threshold, config.fraction, it + 1);
        std::unordered_set<std::string> asked;
        std::size_t added = 0;
        for (const auto* side : {&batch.below, &batch.above}) {
            for (const auto& r : *side) {
                asked.insert(r.id);
                auto y = labels.label(r);
                if (!y) continue;
                LabeledExample e;
                e.id = r.id;
                e.text = r.text;
                e.label = *y;
                e.provenance = Provenance::active_learning;
                e.iteration = it + 1;
                result.training_set.push_back(std::move(e));
                ++added;
            }
        }
        if (added == 0) {
            result.status = "label-starved";
            break;
        }
        ++result.rounds;
        std::erase_if(pool, [&](const PoolRecord& p) { return asked.count(p.id) != 0; });
    }
    return result;
}

std::string history_csv(const std::vector<IterationRecord>& history) {
    std::string out = "iteration,train_size,positives,mean_f1,mean_auc,threshold\n";
    for (const auto& h : history)
        out += csv_row({std::to_string(h.iteration), std::to_string(h.train_size), std::to_string(h.positives),
                        format_double(h.mean_f1), format_double(h.mean_auc), format_double(h.threshold)});
    return out;
}

std::string replication_metadata_json(const ReplicationFigures& f) {
    nlohmann::ordered_json j;
    j["initial"] = {{"total", f.initial_total},
                    {"positives", f.initial_positives},
                    {"negatives", f.initial_negatives},
                    {"appended_non_keyword_negatives", f.appended_non_keyword},
                    {"positives_plus_negatives", f.initial_positives + f.initial_negatives},
                    {"positives_plus_appended", f.initial_positives + f.appended_non_keyword}};
    j["boundary"] = {{"pool", f.boundary_pool}, {"labeled", f.boundary_labeled}, {"threshold", f.threshold}};
    j["final"] = {{"total", f.final_total}, {"positives", f.final_positives}, {"negatives", f.final_negatives}};
    j["metrics"] = {{"f1_before", f.f1_before}, {"auc_before", f.auc_before}, {"f1_after", f.f1_after},
                    {"auc_after", f.auc_after}};
    j["note"] = "reported composition figures; the initial counts are stored as given and not reconciled";
    return j.dump(2) + "\n";
}

}  // namespace hatescope
