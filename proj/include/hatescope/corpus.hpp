#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hatescope/util.hpp"

namespace hatescope {

struct TextRecord {
    std::string id;
    std::string text;
    std::int64_t timestamp = 0;  // UTC seconds
    std::string place_name;
    std::string user_id;
};

struct CensusCovariates {
    double pct_white = 0;
    double pct_black = 0;
    double pct_asian = 0;
    double pct_hispanic_latino = 0;
    double pct_foreign_born = 0;
    double pct_female = 0;
    double pct_age_18_64 = 0;
    double population_density = 1;  // persons / sq mi
    double median_income = 1;       // dollars
};

struct CityRecord {
    std::string city_key;
    std::vector<std::string> aliases;
    long long hate_crime_count = 0;
    CensusCovariates census;
    std::optional<double> lat;
    std::optional<double> lon;
};

/// City set with a normalized-alias index. Aliases are matched after
/// trim + case-fold + whitespace collapse.
class CityRegistry {
public:
    /// Adds a city; returns false (and leaves the registry unchanged) when the key exists.
    bool add(CityRecord city);
    /// Drops an alias from the index (used for aliases shared between cities).
    void forget_alias(const std::string& normalized_alias);

    const CityRecord* find_by_alias(std::string_view place_name) const;
    const CityRecord* find(std::string_view city_key) const;
    const std::vector<CityRecord>& cities() const { return cities_; }
    std::size_t size() const { return cities_.size(); }

private:
    std::vector<CityRecord> cities_;
    std::unordered_map<std::string, std::size_t> by_key_;
    std::unordered_map<std::string, std::size_t> by_alias_;
};

struct RowError {
    std::size_t line = 0;
    std::string reason;
};

struct RegistryLoad {
    CityRegistry registry;
    std::vector<RowError> errors;
};

/// Reads the city registry CSV. Rows violating census invariants or repeating a
/// city_key are rejected into `errors`; a missing required column throws InputError.
/// An alias claimed by two cities is ambiguous and removed from both.
RegistryLoad load_city_registry(std::istream& in);
RegistryLoad load_city_registry(const std::filesystem::path& path);

struct IngestOptions {
    std::int64_t window_start = std::numeric_limits<std::int64_t>::min();
    std::int64_t window_end = std::numeric_limits<std::int64_t>::max();  // inclusive
};

struct IngestedRecord {
    TextRecord record;
    std::string city_key;
};

struct IngestResult {
    std::vector<IngestedRecord> records;  // input order
    std::vector<RowError> rejects;        // malformed lines and duplicate ids
    std::size_t total_lines = 0;
    std::size_t matched = 0;
    std::size_t unmatched = 0;
    std::size_t out_of_window = 0;
    std::size_t rejected = 0;
};

/// Parses one NDJSON record line. Throws InputError describing the defect.
TextRecord parse_record_line(std::string_view line);
std::string record_to_json(const TextRecord& r, const std::string& city_key);

/// Assigns records to cities. Lines are parsed shard-parallel (or serially) and merged
/// in input order; duplicate-id detection runs in the ordered merge.
IngestResult ingest_lines(const std::vector<std::string>& lines, const CityRegistry& registry,
                          const IngestOptions& options = {}, Exec exec = Exec::parallel);
IngestResult ingest_corpus(const std::filesystem::path& path, const CityRegistry& registry,
                           const IngestOptions& options = {}, Exec exec = Exec::parallel);

/// A matched record plus the columns appended by downstream stages.
struct ClassifiedRecord {
    TextRecord record;
    std::string city_key;
    double score = 0;
    bool discrimination = false;
    std::optional<bool> self_narration;  // set by delineation, discrimination records only
    bool is_bot = false;
};

std::string classified_to_json(const ClassifiedRecord& r);
ClassifiedRecord classified_from_json(std::string_view line);
/// Reads an NDJSON artifact, skipping '#' header lines.
std::vector<ClassifiedRecord> load_classified(const std::filesystem::path& path);
std::string serialize_classified(const std::vector<ClassifiedRecord>& records);

std::vector<std::string> split_lines(const std::string& contents);
std::string serialize_ingest(const IngestResult& result);
std::string serialize_rejects(const IngestResult& result);

}  // namespace hatescope
