#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hatescope/classifier.hpp"

namespace hatescope {

inline constexpr const char* kSensitivityNotice =
    "Content warning: the text below may contain offensive, hateful or discriminatory language. "
    "You may stop at any time and keep credit for the work already completed.";

inline constexpr const char* kDefaultCriterion =
    "Label as discrimination if the text expresses or reports hostility, contempt or exclusion aimed at people "
    "because of their race, ethnicity or national origin. Otherwise label as no_discrimination.";

enum class AnnotationErrorCode { unknown_task, unknown_annotator, denied, not_assigned, duplicate, not_in_conflict, bad_label };

class AnnotationError : public std::runtime_error {
public:
    AnnotationError(AnnotationErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    AnnotationErrorCode code() const { return code_; }

private:
    AnnotationErrorCode code_;
};

/// "discrimination" -> 1, "no_discrimination" -> 0; throws AnnotationError otherwise.
int parse_judgment_label(const std::string& s);
std::string judgment_label_name(int label);

struct Annotator {
    std::string id;
    double trust = 1.0;
    int test_correct = 0;
    int test_seen = 0;
    bool active = true;
    bool stopped = false;
    int completed = 0;  // non-test judgments submitted
    bool payment_eligible() const { return completed + test_seen > 0; }
};

struct Judgment {
    std::string task_id;
    std::string annotator_id;
    int label = 0;
    std::string submitted_at;
};

enum class LabelStatus { pending, resolved, conflict };
std::string to_string(LabelStatus s);

struct AggregatedLabel {
    std::string task_id;
    std::optional<int> label;
    double confidence = 0;
    double margin = 0;  // (winner mass - runner-up mass) / total mass
    LabelStatus status = LabelStatus::pending;
    Provenance provenance = Provenance::crowd;
    int judgments = 0;
};

struct AnnotationConfig {
    int min_judgments = 2;
    int test_rate = 10;  // one hidden test task per this many served tasks
    int gate_tasks = 5;
    double gate_trust = 0.8;
    std::string criterion = kDefaultCriterion;
    std::string notice = kSensitivityNotice;
};

struct TaskOffer {
    enum class Kind { task, empty, denied } kind = Kind::empty;
    std::string task_id;
    std::string text;
};

/// In-memory labeling state with an optional append-only JSONL judgment log.
/// All public members are serialized by one mutex.
class AnnotationStore {
public:
    explicit AnnotationStore(AnnotationConfig config = {}, std::optional<std::filesystem::path> log = std::nullopt);

    void add_task(const std::string& id, const std::string& text);
    void add_test_task(const std::string& id, const std::string& text, int gold);
    /// CSV id,text (tasks) and id,text,gold (test tasks).
    void load_tasks(const std::filesystem::path& path);
    void load_test_tasks(const std::filesystem::path& path);

    /// Re-applies a judgment log written by a previous session over the loaded tasks.
    void replay(const std::filesystem::path& log);

    /// Unknown annotators are registered on first request.
    TaskOffer next_task(const std::string& annotator_id);
    AggregatedLabel submit(const Judgment& j);
    AggregatedLabel adjudicate(const std::string& task_id, int label, const std::string& adjudicator_id);
    Annotator stop(const std::string& annotator_id);

    std::optional<Annotator> annotator(const std::string& id) const;
    AggregatedLabel aggregate(const std::string& task_id) const;
    std::string task_text(const std::string& task_id) const;
    std::vector<AggregatedLabel> conflicts() const;
    /// Resolved and adjudicated non-test tasks in task order.
    std::vector<LabeledExample> export_examples() const;
    std::string export_csv() const;
    double mean_confidence() const;

    const AnnotationConfig& config() const { return config_; }
    void set_clock(std::function<std::string()> clock) { clock_ = std::move(clock); }

private:
    struct Task {
        std::string id;
        std::string text;
        std::optional<int> gold;
        std::vector<Judgment> judgments;
        std::optional<int> adjudicated;
    };

    Annotator& ensure_annotator(const std::string& id);
    Task& task_ref(const std::string& id);
    const Task& task_ref(const std::string& id) const;
    AggregatedLabel aggregate_locked(const Task& t) const;
    AggregatedLabel apply_judgment(const Judgment& j);
    void append_log(const std::string& line);
    std::size_t active_judgments(const Task& t) const;

    AnnotationConfig config_;
    std::optional<std::filesystem::path> log_;
    std::function<std::string()> clock_;
    mutable std::mutex mu_;
    std::vector<Task> tasks_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, Annotator> annotators_;
    std::map<std::string, std::string> assigned_;  // annotator -> outstanding task
    std::map<std::string, int> served_;
};

}  // namespace hatescope
