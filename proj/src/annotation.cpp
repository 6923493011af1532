#include "hatescope/annotation.hpp"

#include <cmath>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "hatescope/util.hpp"

namespace hatescope {

using json = nlohmann::ordered_json;

int parse_judgment_label(const std::string& s) {
    const std::string v = ascii_lower(trim(s));
    if (v == "discrimination" || v == "1") return 1;
    if (v == "no_discrimination" || v == "0") return 0;
    throw AnnotationError(AnnotationErrorCode::bad_label, "unknown label '" + s + "'");
}

std::string judgment_label_name(int label) { return label == 1 ? "discrimination" : "no_discrimination"; }

std::string to_string(LabelStatus s) {
    switch (s) {
        case LabelStatus::pending: return "pending";
        case LabelStatus::resolved: return "resolved";
        case LabelStatus::conflict: return "conflict";
    }
    return "pending";
}

AnnotationStore::AnnotationStore(AnnotationConfig config, std::optional<std::filesystem::path> log)
    : config_(std::move(config)), log_(std::move(log)), clock_([] { return format_rfc3339(std::time(nullptr)); }) {
    if (config_.min_judgments < 1) throw std::invalid_argument("min_judgments must be positive");
}

void AnnotationStore::add_task(const std::string& id, const std::string& text) {
    std::lock_guard lock(mu_);
    if (index_.count(id)) throw InputError("duplicate task id " + id);
    index_[id] = tasks_.size();
    tasks_.push_back({id, text, std::nullopt, {}, std::nullopt});
}

void AnnotationStore::add_test_task(const std::string& id, const std::string& text, int gold) {
    std::lock_guard lock(mu_);
    if (index_.count(id)) throw InputError("duplicate task id " + id);
    index_[id] = tasks_.size();
    tasks_.push_back({id, text, gold, {}, std::nullopt});
}

namespace {

template <typename Fn>
void read_task_csv(const std::filesystem::path& path, bool with_gold, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open task file " + path.string());
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) return;
    CsvHeader header(row);
    const auto c_id = header.at("id");
    const auto c_text = header.at("text");
    const auto c_gold = with_gold ? header.at("gold") : 0;
    while (reader.next(row)) {
        if (row.size() < header.size())
            throw InputError(path.string() + ":" + std::to_string(reader.line()) + ": too few fields");
        fn(row[c_id], row[c_text], with_gold ? parse_judgment_label(row[c_gold]) : 0);
    }
}

}  // namespace

void AnnotationStore::load_tasks(const std::filesystem::path& path) {
    read_task_csv(path, false, [&](const std::string& id, const std::string& text, int) { add_task(id, text); });
}

void AnnotationStore::load_test_tasks(const std::filesystem::path& path) {
    read_task_csv(path, true, [&](const std::string& id, const std::string& text, int gold) { add_test_task(id, text, gold); });
}

Annotator& AnnotationStore::ensure_annotator(const std::string& id) {
    auto it = annotators_.find(id);
    if (it == annotators_.end()) {
        Annotator a;
        a.id = id;
        it = annotators_.emplace(id, a).first;
    }
    return it->second;
}

AnnotationStore::Task& AnnotationStore::task_ref(const std::string& id) {
    auto it = index_.find(id);
    if (it == index_.end()) throw AnnotationError(AnnotationErrorCode::unknown_task, "unknown task " + id);
    return tasks_[it->second];
}

const AnnotationStore::Task& AnnotationStore::task_ref(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw AnnotationError(AnnotationErrorCode::unknown_task, "unknown task " + id);
    return tasks_[it->second];
}

std::size_t AnnotationStore::active_judgments(const Task& t) const {
    std::size_t n = 0;
    for (const auto& j : t.judgments) {
        auto it = annotators_.find(j.annotator_id);
        n += it != annotators_.end() && it->second.active;
    }
    return n;
}

namespace {

bool judged_by(const std::vector<Judgment>& js, const std::string& annotator) {
    for (const auto& j : js)
        if (j.annotator_id == annotator) return true;
    return false;
}

}  // namespace

TaskOffer AnnotationStore::next_task(const std::string& annotator_id) {
    std::lock_guard lock(mu_);
    Annotator& a = ensure_annotator(annotator_id);
    TaskOffer offer;
    if (!a.active || a.stopped) {
        offer.kind = TaskOffer::Kind::denied;
        return offer;
    }
    auto give = [&](const Task& t) {
        assigned_[annotator_id] = t.id;
        offer.kind = TaskOffer::Kind::task;
        offer.task_id = t.id;
        offer.text = t.text;
        return offer;
    };
    if (auto it = assigned_.find(annotator_id); it != assigned_.end()) return give(task_ref(it->second));

    int& served = served_[annotator_id];
    const bool test_slot = config_.test_rate > 0 && served % config_.test_rate == config_.test_rate - 1;
    if (test_slot) {
        for (const auto& t : tasks_) {
            if (t.gold && !judged_by(t.judgments, annotator_id)) {
                ++served;
                return give(t);
            }
        }
    }
    const Task* best = nullptr;
    std::size_t best_n = 0;
    for (const auto& t : tasks_) {
        if (t.gold || t.adjudicated || judged_by(t.judgments, annotator_id)) continue;
        const std::size_t n = active_judgments(t);
        if (n >= static_cast<std::size_t>(config_.min_judgments)) continue;
        if (!best || n < best_n) {
            best = &t;
            best_n = n;
        }
    }
    if (!best) return offer;
    ++served;
    return give(*best);
}

AggregatedLabel AnnotationStore::apply_judgment(const Judgment& j) {
    Task& t = task_ref(j.task_id);
    Annotator& a = ensure_annotator(j.annotator_id);
    t.judgments.push_back(j);
    if (t.gold) {
        ++a.test_seen;
        a.test_correct += j.label == *t.gold;
        a.trust = static_cast<double>(a.test_correct) / a.test_seen;
        if (a.test_seen >= config_.gate_tasks && a.trust < config_.gate_trust) a.active = false;
    } else {
        ++a.completed;
    }
    if (auto it = assigned_.find(j.annotator_id); it != assigned_.end() && it->second == j.task_id) assigned_.erase(it);
    return aggregate_locked(t);
}

AggregatedLabel AnnotationStore::submit(const Judgment& in) {
    std::lock_guard lock(mu_);
    Task& t = task_ref(in.task_id);
    auto ait = annotators_.find(in.annotator_id);
    if (ait == annotators_.end())
        throw AnnotationError(AnnotationErrorCode::unknown_annotator, "unknown annotator " + in.annotator_id);
    if (!ait->second.active || ait->second.stopped)
        throw AnnotationError(AnnotationErrorCode::denied, "annotator " + in.annotator_id + " is not active");
    if (judged_by(t.judgments, in.annotator_id))
        throw AnnotationError(AnnotationErrorCode::duplicate,
                              "annotator " + in.annotator_id + " already judged task " + in.task_id);
    auto asg = assigned_.find(in.annotator_id);
    if (asg == assigned_.end() || asg->second != in.task_id)
        throw AnnotationError(AnnotationErrorCode::not_assigned,
                              "task " + in.task_id + " is not assigned to " + in.annotator_id);
    if (in.label != 0 && in.label != 1) throw AnnotationError(AnnotationErrorCode::bad_label, "label must be 0 or 1");
    Judgment j = in;
    if (j.submitted_at.empty()) j.submitted_at = clock_();
    json e;
    e["type"] = "judgment";
    e["task_id"] = j.task_id;
    e["annotator_id"] = j.annotator_id;
    e["label"] = judgment_label_name(j.label);
    e["submitted_at"] = j.submitted_at;
    append_log(e.dump());
    return apply_judgment(j);
}

AggregatedLabel AnnotationStore::adjudicate(const std::string& task_id, int label, const std::string& adjudicator_id) {
    std::lock_guard lock(mu_);
    Task& t = task_ref(task_id);
    if (t.gold || aggregate_locked(t).status != LabelStatus::conflict)
        throw AnnotationError(AnnotationErrorCode::not_in_conflict, "task " + task_id + " is not in conflict");
    if (label != 0 && label != 1) throw AnnotationError(AnnotationErrorCode::bad_label, "label must be 0 or 1");
    json e;
    e["type"] = "adjudication";
    e["task_id"] = task_id;
    e["adjudicator_id"] = adjudicator_id;
    e["label"] = judgment_label_name(label);
    e["submitted_at"] = clock_();
    append_log(e.dump());
    t.adjudicated = label;
    return aggregate_locked(t);
}

Annotator AnnotationStore::stop(const std::string& annotator_id) {
    std::lock_guard lock(mu_);
    auto it = annotators_.find(annotator_id);
    if (it == annotators_.end())
        throw AnnotationError(AnnotationErrorCode::unknown_annotator, "unknown annotator " + annotator_id);
    if (!it->second.stopped) {
        json e;
        e["type"] = "stop";
        e["annotator_id"] = annotator_id;
        e["submitted_at"] = clock_();
        append_log(e.dump());
    }
    it->second.stopped = true;
    assigned_.erase(annotator_id);
    return it->second;
}

void AnnotationStore::replay(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return;
    std::lock_guard lock(mu_);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        json e;
        try {
            e = json::parse(line);
        } catch (const json::exception& ex) {
            throw InputError(path.string() + ":" + std::to_string(n) + ": " + ex.what());
        }
        const std::string type = e.value("type", "");
        if (type == "judgment") {
            Judgment j{e.at("task_id"), e.at("annotator_id"), parse_judgment_label(e.at("label")), e.value("submitted_at", "")};
            apply_judgment(j);
        } else if (type == "adjudication") {
            task_ref(e.at("task_id")).adjudicated = parse_judgment_label(e.at("label"));
        } else if (type == "stop") {
            ensure_annotator(e.at("annotator_id")).stopped = true;
        } else {
            throw InputError(path.string() + ":" + std::to_string(n) + ": unknown event type '" + type + "'");
        }
    }
}

void AnnotationStore::append_log(const std::string& line) {
    if (!log_) return;
    std::ofstream out(*log_, std::ios::app);
    if (!out) throw InputError("cannot append to judgment log " + log_->string());
    out << line << '\n';
    out.flush();
}

AggregatedLabel AnnotationStore::aggregate_locked(const Task& t) const {
    AggregatedLabel out;
    out.task_id = t.id;
    if (t.adjudicated) {
        out.label = *t.adjudicated;
        out.confidence = 1.0;
        out.margin = 1.0;
        out.status = LabelStatus::resolved;
        out.provenance = Provenance::adjudicated;
        out.judgments = static_cast<int>(t.judgments.size());
        return out;
    }
    double mass[2] = {0, 0};
    int n = 0;
    for (const auto& j : t.judgments) {
        auto it = annotators_.find(j.annotator_id);
        if (it == annotators_.end() || !it->second.active) continue;
        mass[j.label] += it->second.trust;
        ++n;
    }
    out.judgments = n;
    if (n < config_.min_judgments) return out;
    const double total = mass[0] + mass[1];
    if (std::abs(mass[1] - mass[0]) <= 1e-12 * std::max(1.0, total)) {
        out.status = LabelStatus::conflict;
        out.confidence = total > 0 ? 0.5 : 0.0;
        return out;
    }
    const int win = mass[1] > mass[0] ? 1 : 0;
    out.label = win;
    out.confidence = mass[win] / total;
    out.margin = (mass[win] - mass[1 - win]) / total;
    out.status = LabelStatus::resolved;
    return out;
}

std::optional<Annotator> AnnotationStore::annotator(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = annotators_.find(id);
    if (it == annotators_.end()) return std::nullopt;
    return it->second;
}

AggregatedLabel AnnotationStore::aggregate(const std::string& task_id) const {
    std::lock_guard lock(mu_);
    return aggregate_locked(task_ref(task_id));
}

std::string AnnotationStore::task_text(const std::string& task_id) const {
    std::lock_guard lock(mu_);
    return task_ref(task_id).text;
}

std::vector<AggregatedLabel> AnnotationStore::conflicts() const {
    std::lock_guard lock(mu_);
    std::vector<AggregatedLabel> out;
    for (const auto& t : tasks_) {
        if (t.gold) continue;
        auto a = aggregate_locked(t);
        if (a.status == LabelStatus::conflict) out.push_back(a);
    }
    return out;
}

std::vector<LabeledExample> AnnotationStore::export_examples() const {
    std::lock_guard lock(mu_);
    std::vector<LabeledExample> out;
    for (const auto& t : tasks_) {
        if (t.gold) continue;
        auto a = aggregate_locked(t);
        if (a.status != LabelStatus::resolved) continue;
        LabeledExample e;
        e.id = t.id;
        e.text = t.text;
        e.label = *a.label;
        e.confidence = a.confidence;
        e.provenance = a.provenance;
        out.push_back(std::move(e));
    }
    return out;
}

std::string AnnotationStore::export_csv() const {
    std::lock_guard lock(mu_);
    std::string out = "task_id,text,label,confidence,provenance,margin\n";
    for (const auto& t : tasks_) {
        if (t.gold) continue;
        auto a = aggregate_locked(t);
        if (a.status != LabelStatus::resolved) continue;
        out += csv_row({t.id, t.text, judgment_label_name(*a.label), format_double(a.confidence), to_string(a.provenance),
                        format_double(a.margin)});
    }
    return out;
}

double AnnotationStore::mean_confidence() const {
    const auto ex = export_examples();
    if (ex.empty()) return 0;
    double s = 0;
    for (const auto& e : ex) s += e.confidence;
    return s / static_cast<double>(ex.size());
}

}  // namespace hatescope
