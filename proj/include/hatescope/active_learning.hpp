#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hatescope/classifier.hpp"
#include "hatescope/util.hpp"

namespace hatescope {

struct PoolRecord {
    std::string id;
    std::string text;
};

struct ScoredRecord {
    std::string id;
    std::string text;
    double score = 0;
};

struct BoundaryBatch {
    std::vector<ScoredRecord> below;  // score < threshold, nearest first
    std::vector<ScoredRecord> above;  // score >= threshold, nearest first
    int iteration = 0;
    std::vector<std::string> warnings;
};

/// Requested count per side: ceil(fraction * pool size).
std::size_t boundary_quota(std::size_t pool_size, double fraction);

/// Takes the ceil(fraction * |pool|) records closest to the threshold on each side,
/// ordered by |score - threshold| then id. A short side yields what it has, with a warning.
/// Throws std::invalid_argument unless 0 < fraction < 0.5.
BoundaryBatch sample_boundary(const std::vector<ScoredRecord>& pool, double threshold, double fraction,
                              int iteration = 0);

/// Supplies human labels for sampled records.
class LabelSource {
public:
    virtual ~LabelSource() = default;
    /// 1 = discrimination, 0 = not; nullopt when no label is available (yet).
    virtual std::optional<int> label(const ScoredRecord& record) = 0;
};

/// Labels looked up by record id, e.g. from an annotation export.
class FixtureLabelSource : public LabelSource {
public:
    explicit FixtureLabelSource(std::unordered_map<std::string, int> labels) : labels_(std::move(labels)) {}
    /// CSV with an id (or task_id) column and a label column.
    static FixtureLabelSource from_csv(const std::filesystem::path& path);
    std::optional<int> label(const ScoredRecord& record) override;

private:
    std::unordered_map<std::string, int> labels_;
};

struct ActiveConfig {
    TrainConfig train;
    int k = 10;
    double fraction = 0.05;
    double epsilon = 0.002;  // plateau: mean-F1 change below this
    int window = 2;          // consecutive evaluations spanning the plateau
    int max_iterations = 10;  // labeling rounds
};

struct IterationRecord {
    int iteration = 0;
    std::size_t train_size = 0;
    std::size_t positives = 0;
    double mean_f1 = 0;
    double mean_auc = 0;
    double threshold = 0;
};

struct ActiveResult {
    ClassifierModel model;
    std::vector<LabeledExample> training_set;
    std::vector<IterationRecord> history;  // entry 0 is the evaluation before any new labels
    int rounds = 0;                        // labeling rounds performed
    std::string status;                    // plateau | max-iterations | label-starved | pool-exhausted
};

/// Each iteration: k-fold evaluate and retrain on the current set, then (unless stopped)
/// sample the boundary batch, obtain labels and append them with active-learning provenance.
/// Stops once `window` consecutive evaluations change mean F1 by less than epsilon each,
/// after max_iterations labeling rounds, or when the label source returns nothing.
ActiveResult run_active_loop(std::vector<LabeledExample> initial, std::vector<PoolRecord> pool, LabelSource& labels,
                             const ActiveConfig& config, Exec exec = Exec::parallel);

std::string history_csv(const std::vector<IterationRecord>& history);

/// Training-set composition figures reported for the original study, kept as metadata
/// next to the history. The initial composition does not add up (see initial_* fields).
struct ReplicationFigures {
    int initial_total = 16000;
    int initial_positives = 1698;
    int initial_negatives = 14302;
    int appended_non_keyword = 14012;
    int final_total = 17000;
    int final_positives = 1987;
    int final_negatives = 15013;
    int boundary_pool = 10000;
    int boundary_labeled = 1000;
    double threshold = 0.623;
    double f1_before = 0.85, auc_before = 0.89;
    double f1_after = 0.86, auc_after = 0.90;
};

std::string replication_metadata_json(const ReplicationFigures& figures = {});

}  // namespace hatescope
