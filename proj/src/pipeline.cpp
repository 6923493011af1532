#include "hatescope/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hatescope/botfilter.hpp"
#include "hatescope/kernels.hpp"
#include "hatescope/lexical.hpp"
#include "hatescope/lexicon.hpp"
#include "hatescope/stats.hpp"

namespace hatescope {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json& dotted(json& root, const std::string& key) {
    json* node = &root;
    for (const auto& part : split(key, '.')) {
        if (part.empty()) throw ConfigError("bad override key '" + key + "'");
        if (!node->is_object()) *node = json::object();
        node = &(*node)[part];
    }
    return *node;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

std::unordered_set<std::string> word_set(const json& j) {
    std::unordered_set<std::string> out;
    for (const auto& w : j) out.insert(ascii_lower(w.get<std::string>()));
    return out;
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path, const std::vector<std::string>& overrides) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const std::exception& e) {
        throw ConfigError("cannot read config " + path.string() + ": " + e.what());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
        const std::string value = o.substr(eq + 1);
        json v;
        try {
            v = json::parse(value);
        } catch (const json::exception&) {
            v = value;
        }
        dotted(j, o.substr(0, eq)) = v;
    }

    PipelineConfig c;
    c.base_dir = fs::absolute(path).parent_path();
    try {
        c.seed = get_or<std::uint64_t>(j, "seed", 1);
        const json& p = j.at("paths");
        auto resolve = [&](const char* key) {
            fs::path v = p.at(key).get<std::string>();
            return v.is_relative() ? c.base_dir / v : v;
        };
        c.corpus = resolve("corpus");
        c.registry = resolve("registry");
        c.lexicon = resolve("lexicon");
        c.categories = resolve("categories");
        c.bot_manifest = resolve("bot_manifest");
        c.training = resolve("training");

        if (auto w = j.find("window"); w != j.end()) {
            auto bound = [&](const char* key, std::int64_t fallback) {
                auto it = w->find(key);
                if (it == w->end()) return fallback;
                auto t = parse_rfc3339(it->get<std::string>());
                if (!t) throw ConfigError(std::string("window.") + key + " is not an RFC 3339 timestamp");
                return *t;
            };
            c.window.window_start = bound("start", c.window.window_start);
            c.window.window_end = bound("end", c.window.window_end);
        }
        const json lex = j.value("lexicon", json::object());
        c.min_sightings = get_or<long long>(lex, "min_sightings", 10);
        c.require_discrimination = get_or<bool>(lex, "require_discrimination", true);

        const json cl = j.value("classifier", json::object());
        c.train.ngrams.orders = get_or<std::vector<int>>(cl, "orders", {1, 2, 3});
        c.train.ngrams.buckets = get_or<std::uint32_t>(cl, "buckets", 1u << 21);
        c.train.dim = get_or<int>(cl, "dim", 10);
        c.train.epochs = get_or<int>(cl, "epochs", 5);
        c.train.learning_rate = get_or<double>(cl, "learning_rate", 0.5);
        c.train.seed = c.seed;
        if (cl.contains("threshold") && !cl["threshold"].is_null()) c.train.threshold = cl["threshold"].get<double>();
        c.k = get_or<int>(cl, "k", 10);
        validate(c.train.ngrams);

        if (auto pr = j.find("pronouns"); pr != j.end()) {
            if (pr->contains("first")) c.pronouns.first = word_set(pr->at("first"));
            if (pr->contains("second")) c.pronouns.second = word_set(pr->at("second"));
            if (pr->contains("third")) c.pronouns.third = word_set(pr->at("third"));
        }
        c.category_names = get_or<std::vector<std::string>>(j, "categories", core_category_preset());

        const json rg = j.value("regression", json::object());
        const std::string social = get_or<std::string>(rg, "social_covariate", "proportion");
        if (social == "proportion") c.social = SocialCovariate::proportion;
        else if (social == "ratio") c.social = SocialCovariate::ratio;
        else throw ConfigError("regression.social_covariate must be proportion or ratio");
        c.exclude_cities = get_or<std::vector<std::string>>(rg, "exclude", {});

        c.feature_k = get_or<int>(j.value("features", json::object()), "k", 20);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    c.canonical = j.dump();
    c.hash = hex64(fnv1a(c.canonical));
    return c;
}

const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages = {"ingest",   "lexicon",   "train",     "classify",
                                                    "delineate", "lexical",  "botfilter", "aggregate",
                                                    "stats",    "map",       "features"};
    return stages;
}

namespace {

std::string generator_tag(const std::string& hash) {
    return "hatescope " + std::string(kPipelineVersion) + " config=" + hash;
}

struct Ctx {
    const PipelineConfig& cfg;
    const fs::path& out;
    Exec exec;
    std::vector<std::string> warnings;

    fs::path at(const std::string& name) const { return out / name; }
    void write(const std::string& name, const std::string& body) const {
        write_file(at(name), artifact_header(cfg.hash) + body);
    }
    void write_json(const std::string& name, json body) const {
        json j;
        j["generator"] = generator_tag(cfg.hash);
        for (auto& [k, v] : body.items()) j[k] = v;
        write_file(at(name), j.dump(2) + "\n");
    }
    fs::path need(const std::string& name) const {
        if (!fs::exists(at(name))) throw std::runtime_error("missing upstream artifact " + at(name).string());
        return at(name);
    }
    CityRegistry registry() {
        auto load = load_city_registry(cfg.registry);
        return std::move(load.registry);
    }
};

void stage_ingest(Ctx& c) {
    auto load = load_city_registry(c.cfg.registry);
    if (!load.errors.empty()) {
        std::string rej = "line_number,reason\n";
        for (const auto& e : load.errors) {
            rej += csv_row({std::to_string(e.line), e.reason});
            c.warnings.push_back("registry line " + std::to_string(e.line) + ": " + e.reason);
        }
        c.write("registry_rejects.csv", rej);
    }
    const IngestResult r = ingest_corpus(c.cfg.corpus, load.registry, c.cfg.window, c.exec);
    if (r.matched + r.unmatched + r.out_of_window + r.rejected != r.total_lines)
        throw InvariantError("ingest partition does not cover the input");
    c.write("ingested.ndjson", serialize_ingest(r));
    c.write("ingest_rejects.csv", serialize_rejects(r));
    c.write_json("ingest_summary.json", {{"total_lines", r.total_lines},
                                         {"matched", r.matched},
                                         {"unmatched", r.unmatched},
                                         {"out_of_window", r.out_of_window},
                                         {"rejected", r.rejected},
                                         {"cities", load.registry.size()}});
}

void stage_lexicon(Ctx& c) {
    const auto entries = filter_lexicon(load_lexicon(c.cfg.lexicon), c.cfg.min_sightings, c.cfg.require_discrimination);
    if (entries.empty()) c.warnings.push_back("lexicon filter left no entries");
    c.write("lexicon_filtered.csv", serialize_lexicon(entries));
    const PhraseMatcher matcher = make_matcher(entries);
    const auto records = load_classified(c.need("ingested.ndjson"));
    std::string hits = "id,city_key,phrases\n";
    for (const auto& r : records) {
        const auto found = match_keywords(r.record.text, matcher);
        if (found.empty()) continue;
        std::string joined;
        for (std::size_t i = 0; i < found.size(); ++i) joined += (i ? "|" : "") + found[i];
        hits += csv_row({r.record.id, r.city_key, joined});
    }
    c.write("keyword_hits.csv", hits);
}

void stage_train(Ctx& c) {
    const auto examples = load_labeled_examples(c.cfg.training);
    TrainConfig tc = c.cfg.train;
    const EvalReport report = kfold_evaluate(examples, c.cfg.k, tc);
    if (!tc.threshold) tc.threshold = report.threshold;
    const ClassifierModel model = train(examples, tc);
    save_model(model, c.at("model.bin"));
    c.write_json("model.json", {{"buckets", model.ngrams.buckets},
                                {"orders", model.ngrams.orders},
                                {"dim", model.dim},
                                {"epochs", model.epochs},
                                {"learning_rate", model.learning_rate},
                                {"seed", model.seed},
                                {"threshold", model.threshold},
                                {"training_examples", examples.size()}});
    json ev = json::parse(eval_report_json(report));
    c.write_json("eval.json", ev);
}

void stage_classify(Ctx& c) {
    const ClassifierModel model = load_model(c.need("model.bin"));
    auto records = load_classified(c.need("ingested.ndjson"));
    std::vector<std::string> texts;
    texts.reserve(records.size());
    for (const auto& r : records) texts.push_back(r.record.text);
    const auto scores = score_batch(model, texts, c.exec);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].score = scores[i];
        records[i].discrimination = model.classify(scores[i]);
    }
    c.write("classified.ndjson", serialize_classified(records));
}

void stage_delineate(Ctx& c) {
    auto records = load_classified(c.need("classified.ndjson"));
    std::vector<std::string> texts;
    for (const auto& r : records) texts.push_back(r.record.text);
    const auto counts = pronoun_batch(texts, c.cfg.pronouns, c.exec);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].self_narration.reset();
        if (records[i].discrimination)
            records[i].self_narration = delineate(counts[i]) == Delineation::self_narration;
    }
    c.write("delineated.ndjson", serialize_classified(records));
}

void stage_lexical(Ctx& c) {
    const auto records = load_classified(c.need("delineated.ndjson"));
    const auto categories = select_categories(load_categories(c.cfg.categories), c.cfg.category_names);
    const CategoryScorer scorer(categories);
    std::vector<std::string> texts, ids;
    for (const auto& r : records) {
        texts.push_back(r.record.text);
        ids.push_back(r.record.id);
    }
    const auto profiles = profile_batch(scorer, texts, c.exec);
    c.write("lexical_profiles.csv", profiles_csv(ids, profiles, c.cfg.category_names));

    std::vector<CategoryProfile> disc, rest;
    std::map<std::string, std::vector<CategoryProfile>> by_user;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].discrimination) {
            disc.push_back(profiles[i]);
            by_user[records[i].record.user_id].push_back(profiles[i]);
        } else {
            rest.push_back(profiles[i]);
        }
    }
    if (!disc.empty() && !rest.empty())
        c.write("lexical_group_ratio.csv", group_ratio_csv(group_ratio(disc, rest, c.cfg.category_names)));
    else
        c.warnings.push_back("group ratio skipped: a group is empty");
    const UserProfiles users = user_profiles(by_user);
    for (const auto& w : users.warnings) c.warnings.push_back(w);
    c.write("lexical_user_buckets.csv", user_profiles_csv(users, c.cfg.category_names));
    c.write("lexical_user_correlations.csv", user_correlations_csv(users));
}

void stage_botfilter(Ctx& c) {
    auto records = load_classified(c.need("delineated.ndjson"));
    const BotIndex index(load_bot_manifest(c.cfg.bot_manifest));
    std::vector<std::string> keys;
    const CityRegistry registry = c.registry();
    for (const auto& city : registry.cities()) keys.push_back(city.city_key);
    const BotScan scan = flag_bots(records, index, keys);
    for (std::size_t i = 0; i < records.size(); ++i) records[i].is_bot = scan.flags[i];
    c.write("records.ndjson", serialize_classified(records));
    c.write("bot_summary.csv", bot_summary_csv(scan));
}

BotScan load_bot_summary(const fs::path& path) {
    std::ifstream in(path);
    CsvReader reader(in);
    std::vector<std::string> row;
    BotScan scan;
    if (!reader.next(row)) return scan;
    CsvHeader h(row);
    while (reader.next(row)) {
        CityBotSummary s;
        s.city_key = row[h.at("city_key")];
        s.discrimination_users = static_cast<std::size_t>(parse_int(row[h.at("discrimination_users")], "discrimination_users"));
        s.bot_users = static_cast<std::size_t>(parse_int(row[h.at("bot_users")], "bot_users"));
        s.share = parse_double(row[h.at("bot_share")], "bot_share");
        scan.cities.push_back(s);
    }
    return scan;
}

void stage_aggregate(Ctx& c) {
    const auto records = load_classified(c.need("records.ndjson"));
    const BotScan bots = load_bot_summary(c.need("bot_summary.csv"));
    const auto aggs = aggregate_cities(records, c.registry(), &bots);
    check_aggregates(aggs, records);
    for (const auto& a : aggs)
        if (a.discrimination_records == 0) c.warnings.push_back(a.city_key + ": no discrimination records");
    c.write("aggregates.csv", aggregates_csv(aggs));
}

void stage_stats(Ctx& c) {
    const auto aggs = load_aggregates_csv(read_file(c.need("aggregates.csv")));
    auto run = [&](const std::vector<std::string>& exclude, const std::string& suffix) {
        const DesignMatrix design = regression_design(aggs, c.cfg.social, exclude);
        const RegressionFit full = fit_negbin(design);
        if (!full.converged) c.warnings.push_back("full regression" + suffix + " did not converge");
        c.write("regression_full" + suffix + ".csv", fit_table_csv(full));
        const StepwiseResult step = stepwise_backward(design, {}, c.exec);
        if (step.aborted) throw std::runtime_error("stepwise selection aborted: " + step.error);
        c.write("regression_stepwise" + suffix + ".csv", fit_table_csv(step.fit));
        c.write("stepwise_trace" + suffix + ".csv", stepwise_trace_csv(step));
        c.write_json("regression_summary" + suffix + ".json",
                     {{"cities", design.rows()},
                      {"full", {{"aic", full.aic}, {"loglik", full.loglik}, {"theta", full.theta}, {"converged", full.converged}}},
                      {"stepwise", {{"aic", step.fit.aic}, {"removed", step.removal_order}}}});
    };
    run({}, "");
    if (!c.cfg.exclude_cities.empty()) run(c.cfg.exclude_cities, "_excluded");
}

void stage_map(Ctx& c) {
    const auto aggs = load_aggregates_csv(read_file(c.need("aggregates.csv")));
    MapOutput m = emit_map_data(aggs, c.registry());
    for (auto& w : m.warnings) c.warnings.push_back(std::move(w));
    json j = json::parse(m.geojson);
    j["generator"] = generator_tag(c.cfg.hash);
    write_file(c.at("map.geojson"), j.dump(1) + "\n");
}

void stage_features(Ctx& c) {
    const ClassifierModel model = load_model(c.need("model.bin"));
    const auto records = load_classified(c.need("records.ndjson"));
    FeatureReport rep = top_features(model, records, c.cfg.feature_k);
    for (auto& w : rep.warnings) c.warnings.push_back(std::move(w));
    c.write("features_top.csv", top_features_csv(rep));
    c.write("features_city.csv", city_features_csv(rep));
    c.write("features_years.csv", year_stability_csv(rep));
}

}  // namespace

std::vector<std::string> run_stage(const std::string& stage, const PipelineConfig& config, const fs::path& out,
                                   Exec exec) {
    fs::create_directories(out);
    Ctx c{config, out, exec, {}};
    static const std::map<std::string, void (*)(Ctx&)> table = {
        {"ingest", stage_ingest},       {"lexicon", stage_lexicon},     {"train", stage_train},
        {"classify", stage_classify},   {"delineate", stage_delineate}, {"lexical", stage_lexical},
        {"botfilter", stage_botfilter}, {"aggregate", stage_aggregate}, {"stats", stage_stats},
        {"map", stage_map},             {"features", stage_features}};
    auto it = table.find(stage);
    if (it == table.end()) throw ConfigError("unknown stage '" + stage + "'");
    it->second(c);
    return c.warnings;
}

PipelineResult run_pipeline(const PipelineConfig& config, const fs::path& out,
                            const std::optional<std::string>& resume_after, Exec exec) {
    PipelineResult result;
    const auto& stages = pipeline_stages();
    std::size_t first = 0;
    if (resume_after) {
        auto it = std::find(stages.begin(), stages.end(), *resume_after);
        if (it == stages.end()) {
            result.exit_code = 2;
            result.message = "unknown stage '" + *resume_after + "'";
            return result;
        }
        first = static_cast<std::size_t>(it - stages.begin()) + 1;
    }
    for (std::size_t i = first; i < stages.size(); ++i) {
        try {
            for (auto& w : run_stage(stages[i], config, out, exec)) result.warnings.push_back(stages[i] + ": " + w);
            result.ran.push_back(stages[i]);
        } catch (const InvariantError& e) {
            result.exit_code = 4;
            result.failed_stage = stages[i];
            result.message = e.what();
            return result;
        } catch (const ConfigError& e) {
            result.exit_code = 2;
            result.failed_stage = stages[i];
            result.message = e.what();
            return result;
        } catch (const std::exception& e) {
            result.exit_code = 3;
            result.failed_stage = stages[i];
            result.message = e.what();
            return result;
        }
    }
    return result;
}

}  // namespace hatescope
