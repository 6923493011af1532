#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "hatescope/active_learning.hpp"
#include "hatescope/classifier.hpp"

// Synthetic data generators used by tests, benchmarks and the gen-fixture command.
// Hate terms are invented placeholder tokens; all output is a pure function of the seed.

namespace hatescope {

/// Placeholder hate-term phrases (1-3 tokens) planted in positive texts.
const std::vector<std::string>& planted_phrases();

/// Neutral filler text of n words.
std::string filler_text(Rng& rng, int words);

struct PlantedCorpusOptions {
    std::size_t records = 5000;
    double positive_rate = 0.12;
    std::uint64_t seed = 1;
    std::string id_prefix = "p";
};

/// Exactly round(records * positive_rate) positives, each carrying a planted phrase.
std::vector<LabeledExample> planted_corpus(const PlantedCorpusOptions& options);

struct BoundaryNoiseFixture {
    std::vector<LabeledExample> initial;  // contains a systematically mislabeled band
    std::vector<PoolRecord> pool;         // unlabeled; answers hold the true labels
    std::unordered_map<std::string, int> answers;
    std::vector<LabeledExample> test;     // clean held-out set
};

/// Texts carrying an ambiguous cue word are truly negative, but half of them are
/// labeled positive in the initial set. The pool and test set are labeled correctly.
BoundaryNoiseFixture boundary_noise_fixture(std::uint64_t seed);

/// Category lexicon file contents for the nine-category preset.
std::string core_categories_text();
/// Stand-in hate-term lexicon CSV (placeholder phrases plus filtered-out entries).
std::string standin_lexicon_csv();

struct FixtureOptions {
    std::uint64_t seed = 2024;
    int cities = 100;
    int min_records = 60;
    int max_records = 140;
    std::size_t training = 3000;
    std::uint32_t buckets = 1u << 18;
};

/// Writes a complete synthetic study directory: cities.csv, corpus.ndjson, lexicon.csv,
/// categories.txt, bots/ with manifest.csv, train.csv, pool.csv, answers.csv, tasks.csv,
/// test_tasks.csv and config.json. Returns the config path.
std::filesystem::path generate_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace hatescope
