#include "hatescope/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "hatescope/tokenize.hpp"
#include "hatescope/util.hpp"

namespace hatescope {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::seed: return "seed";
        case Provenance::crowd: return "crowd";
        case Provenance::adjudicated: return "adjudicated";
        case Provenance::active_learning: return "active-learning";
        case Provenance::auto_negative: return "auto-negative";
    }
    return "seed";
}

Provenance provenance_from_string(std::string_view s) {
    std::string v = ascii_lower(trim(s));
    if (v == "seed" || v.empty()) return Provenance::seed;
    if (v == "crowd") return Provenance::crowd;
    if (v == "adjudicated") return Provenance::adjudicated;
    if (v.rfind("active-learning", 0) == 0 || v == "active_learning") return Provenance::active_learning;
    if (v == "auto-negative" || v == "auto_negative") return Provenance::auto_negative;
    throw InputError("unknown provenance '" + std::string(s) + "'");
}

namespace {

int parse_label(std::string_view s) {
    std::string v = ascii_lower(trim(s));
    if (v == "1" || v == "discrimination") return 1;
    if (v == "0" || v == "no_discrimination") return 0;
    throw InputError("unknown label '" + std::string(s) + "'");
}

}  // namespace

std::vector<LabeledExample> load_labeled_examples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open labeled examples " + path.string());
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) return {};
    CsvHeader header(row);
    const auto c_id = header.find("id") ? header.at("id") : header.at("task_id");
    const auto c_text = header.at("text");
    const auto c_label = header.at("label");
    const auto c_conf = header.find("confidence");
    const auto c_prov = header.find("provenance");
    const auto c_iter = header.find("iteration");
    std::vector<LabeledExample> out;
    while (reader.next(row)) {
        if (row.size() < header.size())
            throw InputError(path.string() + ":" + std::to_string(reader.line()) + ": too few fields");
        LabeledExample e;
        e.id = row[c_id];
        e.text = row[c_text];
        e.label = parse_label(row[c_label]);
        if (c_conf) e.confidence = parse_double(row[*c_conf], "confidence");
        if (c_prov) e.provenance = provenance_from_string(row[*c_prov]);
        if (c_iter && !trim(row[*c_iter]).empty()) e.iteration = static_cast<int>(parse_int(row[*c_iter], "iteration"));
        out.push_back(std::move(e));
    }
    return out;
}

std::string serialize_labeled_examples(const std::vector<LabeledExample>& examples) {
    std::string out = "id,text,label,confidence,provenance,iteration\n";
    for (const auto& e : examples)
        out += csv_row({e.id, e.text, std::to_string(e.label), format_double(e.confidence), to_string(e.provenance),
                        std::to_string(e.iteration)});
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

void validate(const NgramConfig& cfg) {
    if (cfg.buckets == 0 || (cfg.buckets & (cfg.buckets - 1)) != 0)
        throw std::invalid_argument("bucket count must be a power of two");
    if (cfg.orders.empty()) throw std::invalid_argument("no n-gram orders");
    for (int n : cfg.orders)
        if (n < 1 || n > 3) throw std::invalid_argument("n-gram orders must be in {1,2,3}");
}

std::uint32_t ngram_bucket(std::span<const std::string> ngram, std::uint32_t buckets) {
    std::uint64_t h = kFnvOffset;
    for (std::size_t i = 0; i < ngram.size(); ++i) {
        if (i) {
            h ^= 0x1f;
            h *= kFnvPrime;
        }
        h = fnv1a(ngram[i], h);
    }
    h = mix64(h ^ ngram.size());
    return static_cast<std::uint32_t>(h & (buckets - 1));
}

FeatureVector featurize_tokens(const std::vector<std::string>& tokens, const NgramConfig& cfg) {
    FeatureVector ids;
    for (int n : cfg.orders) {
        if (tokens.size() < static_cast<std::size_t>(n)) continue;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i)
            ids.push_back(ngram_bucket(std::span<const std::string>(tokens.data() + i, n), cfg.buckets));
    }
    return ids;
}

FeatureVector featurize(std::string_view text, const NgramConfig& cfg) { return featurize_tokens(tokenize(text), cfg); }

// ---------------------------------------------------------------------------

namespace {

// Mean-pooled hidden vector; zero for an empty feature vector.
void pool(const ClassifierModel& m, const FeatureVector& f, std::vector<double>& hidden) {
    hidden.assign(m.dim, 0.0);
    if (f.empty()) return;
    for (auto id : f) {
        const double* r = m.row(id);
        for (int j = 0; j < m.dim; ++j) hidden[j] += r[j];
    }
    const double inv = 1.0 / static_cast<double>(f.size());
    for (auto& h : hidden) h *= inv;
}

double logit(const ClassifierModel& m, const std::vector<double>& hidden) {
    double z = m.bias;
    for (int j = 0; j < m.dim; ++j) z += m.output[j] * hidden[j];
    return z;
}

}  // namespace

double ClassifierModel::score(const FeatureVector& features) const {
    std::vector<double> hidden;
    pool(*this, features, hidden);
    return sigmoid(logit(*this, hidden));
}

double ClassifierModel::predict(std::string_view text) const { return score(featurize(text, ngrams)); }

double example_loss(const ClassifierModel& model, const FeatureVector& features, int label) {
    std::vector<double> hidden;
    pool(model, features, hidden);
    double z = logit(model, hidden);
    return softplus(z) - label * z;
}

ModelGradient example_gradient(const ClassifierModel& model, const FeatureVector& features, int label) {
    std::vector<double> hidden;
    pool(model, features, hidden);
    const double g = sigmoid(logit(model, hidden)) - label;
    ModelGradient grad;
    grad.bias = g;
    grad.output.resize(model.dim);
    for (int j = 0; j < model.dim; ++j) grad.output[j] = g * hidden[j];
    if (!features.empty()) {
        const double scale = g / static_cast<double>(features.size());
        for (auto id : features) {
            auto& r = grad.rows[id];
            r.resize(model.dim, 0.0);
            for (int j = 0; j < model.dim; ++j) r[j] += scale * model.output[j];
        }
    }
    return grad;
}

ClassifierModel train_features(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                               const TrainConfig& config) {
    validate(config.ngrams);
    if (config.dim <= 0) throw std::invalid_argument("embedding dimension must be positive");
    if (features.empty() || features.size() != labels.size()) throw std::invalid_argument("no training examples");
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    if (positives == 0 || positives == static_cast<long>(labels.size())) throw std::invalid_argument("degenerate labels");

    ClassifierModel m;
    m.ngrams = config.ngrams;
    m.dim = config.dim;
    m.seed = config.seed;
    m.epochs = config.epochs;
    m.learning_rate = config.learning_rate;
    Rng rng(config.seed);
    const double bound = 1.0 / config.dim;
    m.embeddings.resize(std::size_t(config.ngrams.buckets) * config.dim);
    for (auto& w : m.embeddings) w = rng.uniform(-bound, bound);
    m.output.assign(config.dim, 0.0);
    m.bias = 0.0;

    const std::size_t n = features.size();
    const double total_steps = static_cast<double>(n) * std::max(config.epochs, 0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> hidden, grad_hidden(config.dim);
    std::size_t step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const double lr = config.learning_rate * (1.0 - static_cast<double>(step) / total_steps);
            ++step;
            const FeatureVector& f = features[idx];
            pool(m, f, hidden);
            const double g = sigmoid(logit(m, hidden)) - labels[idx];
            for (int j = 0; j < m.dim; ++j) grad_hidden[j] = g * m.output[j];
            for (int j = 0; j < m.dim; ++j) m.output[j] -= lr * g * hidden[j];
            m.bias -= lr * g;
            if (f.empty()) continue;
            const double scale = lr / static_cast<double>(f.size());
            for (auto id : f) {
                double* r = m.embeddings.data() + std::size_t(id) * m.dim;
                for (int j = 0; j < m.dim; ++j) r[j] -= scale * grad_hidden[j];
            }
        }
    }

    if (config.threshold) {
        m.threshold = *config.threshold;
    } else {
        std::vector<std::pair<double, int>> scored(n);
        for (std::size_t i = 0; i < n; ++i) scored[i] = {m.score(features[i]), labels[i]};
        m.threshold = select_threshold(scored);
    }
    if (!(m.threshold > 0 && m.threshold < 1)) throw std::invalid_argument("threshold must be in (0,1)");
    return m;
}

ClassifierModel train(const std::vector<LabeledExample>& examples, const TrainConfig& config) {
    std::vector<FeatureVector> features;
    std::vector<int> labels;
    features.reserve(examples.size());
    for (const auto& e : examples) {
        features.push_back(featurize(e.text, config.ngrams));
        labels.push_back(e.label);
    }
    return train_features(features, labels, config);
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
void put(std::string& out, const T& v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw InputError("model file truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::string serialize_model(const ClassifierModel& m) {
    std::string out(kModelMagic, 4);
    put(out, kModelVersion);
    put(out, m.ngrams.buckets);
    put(out, static_cast<std::uint32_t>(m.dim));
    put(out, static_cast<std::uint32_t>(m.ngrams.orders.size()));
    for (int o : m.ngrams.orders) put(out, static_cast<std::uint32_t>(o));
    put(out, m.threshold);
    put(out, m.seed);
    put(out, static_cast<std::uint32_t>(m.epochs));
    put(out, m.learning_rate);
    put(out, m.bias);
    for (double w : m.output) put(out, w);
    out.append(reinterpret_cast<const char*>(m.embeddings.data()), m.embeddings.size() * sizeof(double));
    return out;
}

ClassifierModel deserialize_model(const std::string& in) {
    if (in.size() < 4 || std::memcmp(in.data(), kModelMagic, 4) != 0) throw InputError("not a model file (bad magic)");
    std::size_t pos = 4;
    if (get<std::uint32_t>(in, pos) != kModelVersion) throw InputError("unsupported model version");
    ClassifierModel m;
    m.ngrams.buckets = get<std::uint32_t>(in, pos);
    m.dim = static_cast<int>(get<std::uint32_t>(in, pos));
    const auto n_orders = get<std::uint32_t>(in, pos);
    if (n_orders > 3) throw InputError("model file: bad order count");
    m.ngrams.orders.clear();
    for (std::uint32_t i = 0; i < n_orders; ++i) m.ngrams.orders.push_back(static_cast<int>(get<std::uint32_t>(in, pos)));
    m.threshold = get<double>(in, pos);
    m.seed = get<std::uint64_t>(in, pos);
    m.epochs = static_cast<int>(get<std::uint32_t>(in, pos));
    m.learning_rate = get<double>(in, pos);
    m.bias = get<double>(in, pos);
    m.output.resize(m.dim);
    for (auto& w : m.output) w = get<double>(in, pos);
    const std::size_t count = std::size_t(m.ngrams.buckets) * m.dim;
    if (in.size() - pos != count * sizeof(double)) throw InputError("model file: embedding size mismatch");
    m.embeddings.resize(count);
    std::memcpy(m.embeddings.data(), in.data() + pos, count * sizeof(double));
    validate(m.ngrams);
    return m;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    write_file(path, serialize_model(model));
}

ClassifierModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

// ---------------------------------------------------------------------------

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] >= threshold;
        if (labels[i]) {
            pred ? ++c.tp : ++c.fn;
        } else {
            pred ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

Metrics metrics_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
    Metrics m;
    m.confusion = confusion_at(scores, labels, threshold);
    const auto& c = m.confusion;
    m.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    m.recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.auc = auc(scores, labels);
    return m;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Twice the mid-rank sum of positives keeps everything integral.
    double twice_rank_sum = 0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double twice_mid = static_cast<double>(i + 1 + j);  // 2 * average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (labels[idx[k]]) {
                twice_rank_sum += twice_mid;
                ++n_pos;
            }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("AUC needs both classes");
    const double twice_u = twice_rank_sum - static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return twice_u / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double select_threshold(std::span<const std::pair<double, int>> scored) {
    std::vector<double> pos, neg;
    for (auto [s, y] : scored) (y ? pos : neg).push_back(s);
    if (pos.empty() || neg.empty()) throw std::invalid_argument("threshold selection needs both labels");
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    const auto at_least = [](const std::vector<double>& v, double t) {
        return static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), t));
    };
    double best_t = 0.001, best_f1 = -1;
    for (int i = 1; i <= 999; ++i) {
        const double t = i / 1000.0;
        const std::size_t tp = at_least(pos, t), fp = at_least(neg, t);
        const std::size_t fn = pos.size() - tp;
        // 2TP / (2TP + FP + FN): a single rounding of the exact ratio, so equal F1 values compare equal.
        const double f1 = tp ? 2.0 * tp / static_cast<double>(2 * tp + fp + fn) : 0.0;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_t = t;
        }
    }
    return best_t;
}

std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    if (k < 2) throw std::invalid_argument("k must be at least 2");
    if (static_cast<std::size_t>(k) > std::min(pos.size(), neg.size()))
        throw std::invalid_argument("k exceeds the smaller class count");
    Rng rng(seed ^ 0x5eedf01dULL);
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<int> fold(labels.size());
    for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % k);
    for (std::size_t j = 0; j < neg.size(); ++j) fold[neg[j]] = static_cast<int>((pos.size() + j) % k);
    return fold;
}

EvalReport kfold_evaluate(const std::vector<LabeledExample>& examples, int k, const TrainConfig& config) {
    if (k < 2) throw std::invalid_argument("k must be at least 2");
    if (examples.size() < static_cast<std::size_t>(k)) throw std::invalid_argument("fewer examples than folds");
    std::vector<int> labels;
    std::vector<FeatureVector> features;
    for (const auto& e : examples) {
        labels.push_back(e.label);
        features.push_back(featurize(e.text, config.ngrams));
    }
    const std::vector<int> fold = stratified_folds(labels, k, config.seed);

    EvalReport report;
    report.k = k;
    report.out_of_fold_scores.assign(examples.size(), 0.0);
    TrainConfig fold_config = config;
    fold_config.threshold = 0.5;  // unused: fold models only produce scores
    for (int f = 0; f < k; ++f) {
        std::vector<FeatureVector> train_x;
        std::vector<int> train_y;
        for (std::size_t i = 0; i < examples.size(); ++i)
            if (fold[i] != f) {
                train_x.push_back(features[i]);
                train_y.push_back(labels[i]);
            }
        ClassifierModel model = train_features(train_x, train_y, fold_config);
        for (std::size_t i = 0; i < examples.size(); ++i)
            if (fold[i] == f) report.out_of_fold_scores[i] = model.score(features[i]);
    }

    if (config.threshold) {
        report.threshold = *config.threshold;
    } else {
        std::vector<std::pair<double, int>> pooled(examples.size());
        for (std::size_t i = 0; i < examples.size(); ++i) pooled[i] = {report.out_of_fold_scores[i], labels[i]};
        report.threshold = select_threshold(pooled);
    }

    for (int f = 0; f < k; ++f) {
        std::vector<double> s;
        std::vector<int> y;
        for (std::size_t i = 0; i < examples.size(); ++i)
            if (fold[i] == f) {
                s.push_back(report.out_of_fold_scores[i]);
                y.push_back(labels[i]);
            }
        Metrics m = metrics_at(s, y, report.threshold);
        report.total.tp += m.confusion.tp;
        report.total.fp += m.confusion.fp;
        report.total.tn += m.confusion.tn;
        report.total.fn += m.confusion.fn;
        report.mean_precision += m.precision / k;
        report.mean_recall += m.recall / k;
        report.mean_f1 += m.f1 / k;
        report.mean_auc += m.auc / k;
        report.folds.push_back(m);
    }
    return report;
}

std::string eval_report_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["k"] = r.k;
    j["threshold"] = r.threshold;
    auto confusion = [](const Confusion& c) {
        nlohmann::ordered_json cj;
        cj["tp"] = c.tp;
        cj["fp"] = c.fp;
        cj["tn"] = c.tn;
        cj["fn"] = c.fn;
        return cj;
    };
    j["folds"] = nlohmann::ordered_json::array();
    for (const auto& m : r.folds) {
        nlohmann::ordered_json fj;
        fj["precision"] = m.precision;
        fj["recall"] = m.recall;
        fj["f1"] = m.f1;
        fj["auc"] = m.auc;
        fj["confusion"] = confusion(m.confusion);
        j["folds"].push_back(fj);
    }
    j["mean"] = {{"precision", r.mean_precision}, {"recall", r.mean_recall}, {"f1", r.mean_f1}, {"auc", r.mean_auc}};
    j["confusion"] = confusion(r.total);
    return j.dump(2) + "\n";
}

}  // namespace hatescope
