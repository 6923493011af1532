#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hatescope {

enum class Provenance { seed, crowd, adjudicated, active_learning, auto_negative };

std::string to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct LabeledExample {
    std::string id;
    std::string text;
    int label = 0;  // 1 = discrimination
    double confidence = 1.0;
    Provenance provenance = Provenance::seed;
    int iteration = 0;  // active-learning round that appended the example, 0 otherwise
};

/// Labeled-example CSV: id,text,label,confidence,provenance[,iteration].
/// label accepts 0/1 or discrimination/no_discrimination.
std::vector<LabeledExample> load_labeled_examples(const std::filesystem::path& path);
std::string serialize_labeled_examples(const std::vector<LabeledExample>& examples);

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

struct NgramConfig {
    std::vector<int> orders{1, 2, 3};
    std::uint32_t buckets = 1u << 21;
};

/// Multiset of hashed word n-gram ids in [0, buckets).
using FeatureVector = std::vector<std::uint32_t>;

/// Hash bucket of the n-gram tokens[begin, begin + n).
std::uint32_t ngram_bucket(std::span<const std::string> ngram, std::uint32_t buckets);

FeatureVector featurize_tokens(const std::vector<std::string>& tokens, const NgramConfig& cfg);
/// One id per word n-gram of each configured order over the shared tokenizer's output.
FeatureVector featurize(std::string_view text, const NgramConfig& cfg);

/// Visits (bucket, n-gram string) for every n-gram of the text; used for reverse mapping.
template <typename Fn>
void for_each_ngram(const std::vector<std::string>& tokens, const NgramConfig& cfg, Fn&& fn);

void validate(const NgramConfig& cfg);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct TrainConfig {
    NgramConfig ngrams;
    int dim = 10;
    int epochs = 5;
    double learning_rate = 0.5;  // decayed linearly to 0 over all updates
    std::uint64_t seed = 1;
    /// Fixed decision threshold; when unset, train() selects it on training-set scores
    /// and kfold_evaluate() on pooled out-of-fold scores.
    std::optional<double> threshold;
};

struct ClassifierModel {
    NgramConfig ngrams;
    int dim = 10;
    std::vector<double> embeddings;  // buckets x dim, row-major
    std::vector<double> output;      // dim
    double bias = 0;
    double threshold = 0.5;
    // training metadata
    std::uint64_t seed = 0;
    int epochs = 0;
    double learning_rate = 0;

    /// Sigmoid of the linear readout over the mean-pooled embeddings. An empty
    /// feature vector pools to zero, giving sigmoid(bias).
    double score(const FeatureVector& features) const;
    double predict(std::string_view text) const;
    /// Inclusive: score >= threshold is discrimination.
    bool classify(double score) const { return score >= threshold; }

    const double* row(std::uint32_t bucket) const { return embeddings.data() + std::size_t(bucket) * dim; }
};

inline constexpr char kModelMagic[4] = {'H', 'S', 'C', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);
std::string serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(const std::string& bytes);

/// Per-example binary cross-entropy.
double example_loss(const ClassifierModel& model, const FeatureVector& features, int label);

struct ModelGradient {
    std::unordered_map<std::uint32_t, std::vector<double>> rows;  // d loss / d embedding row
    std::vector<double> output;
    double bias = 0;
};

ModelGradient example_gradient(const ClassifierModel& model, const FeatureVector& features, int label);

/// Throws std::invalid_argument("degenerate labels") when only one class is present.
ClassifierModel train(const std::vector<LabeledExample>& examples, const TrainConfig& config);
/// Same optimizer, starting from pre-computed features (labels parallel to features).
ClassifierModel train_features(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                               const TrainConfig& config);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const { return tp + fp + tn + fn; }
};

struct Metrics {
    double precision = 0, recall = 0, f1 = 0, auc = 0;
    Confusion confusion;
};

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold);
/// F1 = 2PR/(P+R), 0 when P+R = 0; precision is 0 when nothing is predicted positive.
Metrics metrics_at(std::span<const double> scores, std::span<const int> labels, double threshold);
/// Probability a random positive outscores a random negative, ties counted 1/2 (mid-rank U statistic).
double auc(std::span<const double> scores, std::span<const int> labels);

/// Grid point t in {0.001..0.999} maximizing F1 of score >= t; ties go to the smallest t.
double select_threshold(std::span<const std::pair<double, int>> scored);

/// Stratified k-fold assignment: fold index per example. Per-class fold counts differ by <= 1,
/// as do total fold sizes.
std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

struct EvalReport {
    int k = 0;
    double threshold = 0;
    std::vector<Metrics> folds;
    double mean_precision = 0, mean_recall = 0, mean_f1 = 0, mean_auc = 0;
    Confusion total;
    std::vector<double> out_of_fold_scores;  // per input example
};

/// Throws std::invalid_argument when k < 2 or k exceeds the smaller class count.
EvalReport kfold_evaluate(const std::vector<LabeledExample>& examples, int k, const TrainConfig& config);
std::string eval_report_json(const EvalReport& report);

// ---------------------------------------------------------------------------

template <typename Fn>
void for_each_ngram(const std::vector<std::string>& tokens, const NgramConfig& cfg, Fn&& fn) {
    for (int n : cfg.orders) {
        if (tokens.size() < static_cast<std::size_t>(n)) continue;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::span<const std::string> gram(tokens.data() + i, static_cast<std::size_t>(n));
            std::string joined = tokens[i];
            for (int j = 1; j < n; ++j) {
                joined.push_back(' ');
                joined += tokens[i + j];
            }
            fn(ngram_bucket(gram, cfg.buckets), joined);
        }
    }
}

}  // namespace hatescope
