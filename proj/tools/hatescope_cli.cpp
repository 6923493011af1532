#include <csignal>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "hatescope/active_learning.hpp"
#include "hatescope/annotation.hpp"
#include "hatescope/annotation_http.hpp"
#include "hatescope/fixture.hpp"
#include "hatescope/lexicon.hpp"
#include "hatescope/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hatescope;

namespace {

struct PipelineArgs {
    std::string config;
    std::string out = "artifacts";
    std::vector<std::string> set;
    bool serial = false;
};

void add_pipeline_args(CLI::App* cmd, PipelineArgs& a) {
    cmd->add_option("-c,--config", a.config, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", a.out, "Artifact directory");
    cmd->add_option("--set", a.set, "Config override key.path=value (repeatable)");
    cmd->add_flag("--serial", a.serial, "Disable record-parallel kernels");
}

int report(const PipelineResult& r) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    if (r.exit_code != 0) {
        std::cerr << "error";
        if (!r.failed_stage.empty()) std::cerr << " in stage " << r.failed_stage;
        std::cerr << ": " << r.message << "\n";
    }
    return r.exit_code;
}

int run_single(const std::string& stage, const PipelineArgs& a) {
    PipelineConfig cfg;
    try {
        cfg = load_pipeline_config(a.config, a.set);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    PipelineResult r;
    try {
        for (auto& w : run_stage(stage, cfg, a.out, a.serial ? Exec::serial : Exec::parallel))
            r.warnings.push_back(stage + ": " + w);
    } catch (const InvariantError& e) {
        r.exit_code = 4;
        r.failed_stage = stage;
        r.message = e.what();
    } catch (const ConfigError& e) {
        r.exit_code = 2;
        r.failed_stage = stage;
        r.message = e.what();
    } catch (const std::exception& e) {
        r.exit_code = 3;
        r.failed_stage = stage;
        r.message = e.what();
    }
    return report(r);
}

int build_trainset(const PipelineArgs& a, std::size_t negatives, const std::string& labels) {
    const PipelineConfig cfg = load_pipeline_config(a.config, a.set);
    const fs::path out = a.out;
    const auto records = load_classified(out / "ingested.ndjson");
    const auto entries = filter_lexicon(load_lexicon(cfg.lexicon), cfg.min_sightings, cfg.require_discrimination);
    const PhraseMatcher matcher = make_matcher(entries);
    std::string tasks = "id,text\n";
    std::vector<LabeledExample> pool;
    for (const auto& r : records) {
        if (!match_keywords(r.record.text, matcher).empty()) {
            tasks += csv_row({r.record.id, r.record.text});
        } else {
            LabeledExample e;
            e.id = r.record.id;
            e.text = r.record.text;
            e.label = 0;
            e.provenance = Provenance::auto_negative;
            pool.push_back(std::move(e));
        }
    }
    Rng rng(cfg.seed);
    rng.shuffle(pool);
    if (pool.size() > negatives) pool.resize(negatives);
    write_file(out / "annotation_tasks.csv", tasks);
    write_file(out / "auto_negatives.csv", serialize_labeled_examples(pool));
    if (!labels.empty()) {
        auto merged = load_labeled_examples(labels);
        merged.insert(merged.end(), pool.begin(), pool.end());
        write_file(out / "trainset.csv", serialize_labeled_examples(merged));
    }
    std::cout << "annotation tasks and " << pool.size() << " auto-negatives written to " << out << "\n";
    return 0;
}

std::vector<PoolRecord> load_pool(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open pool " + path.string());
    CsvReader reader(in);
    std::vector<std::string> row;
    std::vector<PoolRecord> out;
    if (!reader.next(row)) return out;
    CsvHeader h(row);
    const auto c_id = h.at("id"), c_text = h.at("text");
    while (reader.next(row)) out.push_back({row[c_id], row[c_text]});
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hatescope: city-level discrimination discourse pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kPipelineVersion));

    PipelineArgs pa;
    std::string resume_after;
    auto* run_all = app.add_subcommand("run-all", "Run every pipeline stage");
    add_pipeline_args(run_all, pa);
    run_all->add_option("--resume-after", resume_after, "Skip stages up to and including this one");

    const std::map<std::string, std::pair<std::string, std::string>> stage_commands = {
        {"ingest", {"ingest", "Assign records to cities"}},
        {"train", {"train", "Train the classifier with k-fold threshold selection"}},
        {"classify", {"classify", "Score and classify ingested records"}},
        {"delineate", {"delineate", "Split discrimination records into targeted and self-narration"}},
        {"lexical", {"lexical", "Category profiles, group ratios and user buckets"}},
        {"botscan", {"botfilter", "Flag listed bot accounts"}},
        {"aggregate", {"aggregate", "Per-city aggregates"}},
        {"regress", {"stats", "Negative binomial regression with stepwise selection"}},
        {"map", {"map", "Geo-feature map data"}},
        {"features", {"features", "Top predictive features per city"}},
    };
    std::map<CLI::App*, std::string> stage_of;
    for (const auto& [name, spec] : stage_commands) {
        auto* cmd = app.add_subcommand(name, spec.second);
        add_pipeline_args(cmd, pa);
        stage_of[cmd] = spec.first;
    }

    auto* evaluate = app.add_subcommand("evaluate", "k-fold evaluation of a labeled CSV");
    std::string eval_input, eval_out;
    evaluate->add_option("-c,--config", pa.config, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--set", pa.set, "Config override key.path=value");
    evaluate->add_option("--input", eval_input, "Labeled examples (defaults to the configured training set)");
    evaluate->add_option("--report", eval_out, "Write the JSON report here instead of stdout");

    std::size_t negatives = 14012;
    std::string labels;
    auto* trainset = app.add_subcommand("build-trainset", "Keyword-matched annotation tasks plus auto-negatives");
    add_pipeline_args(trainset, pa);
    trainset->add_option("--negatives", negatives, "Number of non-keyword records appended as negatives");
    trainset->add_option("--labels", labels, "Exported crowd labels to merge into trainset.csv");

    std::string tasks_path, test_tasks_path, log_path, history_path, host = "127.0.0.1";
    int port = 8080, min_judgments = 2, test_rate = 10;
    auto* serve = app.add_subcommand("annotate-serve", "Serve the annotation HTTP API");
    serve->add_option("--tasks", tasks_path, "Task CSV id,text")->required()->check(CLI::ExistingFile);
    serve->add_option("--test-tasks", test_tasks_path, "Test task CSV id,text,gold")->check(CLI::ExistingFile);
    serve->add_option("--log", log_path, "Append-only judgment log (replayed on start)");
    serve->add_option("--history", history_path, "Active-learning history CSV to expose");
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->add_option("--min-judgments", min_judgments);
    serve->add_option("--test-rate", test_rate, "One hidden test task per N served tasks");

    std::string al_train, al_pool, al_answers, al_out = "active";
    ActiveConfig al;
    std::uint32_t al_buckets = 1u << 21;
    auto* active = app.add_subcommand("active-learn", "Boundary-sampling active learning loop");
    active->add_option("--train", al_train, "Initial labeled CSV")->required()->check(CLI::ExistingFile);
    active->add_option("--pool", al_pool, "Unlabeled pool CSV id,text")->required()->check(CLI::ExistingFile);
    active->add_option("--answers", al_answers, "Label source CSV (id/task_id,text,label)")->required()->check(CLI::ExistingFile);
    active->add_option("-o,--out", al_out);
    active->add_option("--k", al.k);
    active->add_option("--fraction", al.fraction);
    active->add_option("--epsilon", al.epsilon);
    active->add_option("--max-iterations", al.max_iterations);
    active->add_option("--buckets", al_buckets);
    active->add_option("--seed", al.train.seed);

    std::string fx_out = "fixture";
    FixtureOptions fx;
    auto* gen = app.add_subcommand("gen-fixture", "Write the synthetic 100-city study fixture");
    gen->add_option("-o,--out", fx_out);
    gen->add_option("--seed", fx.seed);
    gen->add_option("--cities", fx.cities);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_all->parsed()) {
            PipelineConfig cfg;
            try {
                cfg = load_pipeline_config(pa.config, pa.set);
            } catch (const ConfigError& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            std::optional<std::string> resume;
            if (!resume_after.empty()) resume = resume_after;
            const auto r = run_pipeline(cfg, pa.out, resume, pa.serial ? Exec::serial : Exec::parallel);
            if (r.exit_code == 0) std::cout << "ran " << r.ran.size() << " stages into " << pa.out << "\n";
            return report(r);
        }
        for (const auto& [cmd, stage] : stage_of)
            if (cmd->parsed()) return run_single(stage, pa);

        if (evaluate->parsed()) {
            const PipelineConfig cfg = load_pipeline_config(pa.config, pa.set);
            const auto examples = load_labeled_examples(eval_input.empty() ? cfg.training : fs::path(eval_input));
            const std::string json = eval_report_json(kfold_evaluate(examples, cfg.k, cfg.train));
            if (eval_out.empty()) std::cout << json;
            else write_file(eval_out, json);
            return 0;
        }
        if (trainset->parsed()) return build_trainset(pa, negatives, labels);

        if (serve->parsed()) {
            AnnotationConfig ac;
            ac.min_judgments = min_judgments;
            ac.test_rate = test_rate;
            std::optional<fs::path> log;
            if (!log_path.empty()) log = log_path;
            AnnotationStore store(ac, log);
            store.load_tasks(tasks_path);
            if (!test_tasks_path.empty()) store.load_test_tasks(test_tasks_path);
            if (log) store.replay(*log);
            std::optional<std::string> token;
            if (const char* t = std::getenv(kAnnotationTokenEnv); t && *t) token = t;
            std::optional<fs::path> history;
            if (!history_path.empty()) history = history_path;
            AnnotationServer server(store, token, history);
            const int bound = server.bind(host, port);
            if (bound < 0) {
                std::cerr << "cannot bind " << host << ":" << port << "\n";
                return 3;
            }
            std::cout << "annotation service listening on " << host << ":" << bound << std::endl;
            server.listen();
            return 0;
        }

        if (active->parsed()) {
            al.train.ngrams.buckets = al_buckets;
            auto source = FixtureLabelSource::from_csv(al_answers);
            const auto result = run_active_loop(load_labeled_examples(al_train), load_pool(al_pool), source, al);
            const fs::path out = al_out;
            write_file(out / "history.csv", history_csv(result.history));
            write_file(out / "active_train.csv", serialize_labeled_examples(result.training_set));
            write_file(out / "replication.json", replication_metadata_json());
            save_model(result.model, out / "model.bin");
            std::cout << "status " << result.status << " after " << result.rounds << " labeling rounds\n";
            return 0;
        }

        if (gen->parsed()) {
            const auto cfg = generate_fixture(fx_out, fx);
            std::cout << "fixture written; config at " << cfg.string() << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
