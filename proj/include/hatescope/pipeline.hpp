#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hatescope/classifier.hpp"
#include "hatescope/corpus.hpp"
#include "hatescope/delineate.hpp"
#include "hatescope/report.hpp"
#include "hatescope/util.hpp"

namespace hatescope {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    std::filesystem::path base_dir;  // relative paths resolve here
    std::uint64_t seed = 1;
    std::filesystem::path corpus, registry, lexicon, categories, bot_manifest, training;
    IngestOptions window;
    long long min_sightings = 10;
    bool require_discrimination = true;
    TrainConfig train;
    int k = 10;
    PronounLists pronouns;
    std::vector<std::string> category_names;
    SocialCovariate social = SocialCovariate::proportion;
    std::vector<std::string> exclude_cities;
    int feature_k = 20;
    std::string canonical;  // effective config JSON
    std::string hash;       // hex FNV-1a of `canonical`
};

/// Reads the declarative JSON config and applies `key.path=value` overrides
/// (values parsed as JSON, falling back to a plain string). Throws ConfigError.
PipelineConfig load_pipeline_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Stage names in execution order.
const std::vector<std::string>& pipeline_stages();

/// Runs one stage, reading upstream artifacts from and writing its own into `out`.
/// Throws on failure (InvariantError for count-identity violations).
std::vector<std::string> run_stage(const std::string& stage, const PipelineConfig& config,
                                   const std::filesystem::path& out, Exec exec = Exec::parallel);

struct PipelineResult {
    int exit_code = 0;  // 0 ok, 2 config, 3 stage failure, 4 invariant violation
    std::string failed_stage;
    std::string message;
    std::vector<std::string> ran;
    std::vector<std::string> warnings;
};

/// Runs the stages after `resume_after` (all when unset). Artifacts of completed
/// stages are left in place when a later stage fails.
PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& out,
                            const std::optional<std::string>& resume_after = std::nullopt, Exec exec = Exec::parallel);

}  // namespace hatescope
