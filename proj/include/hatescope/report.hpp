#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hatescope/botfilter.hpp"
#include "hatescope/classifier.hpp"
#include "hatescope/corpus.hpp"
#include "hatescope/stats.hpp"

namespace hatescope {

struct CityAggregate {
    std::string city_key;
    std::size_t total_records = 0;
    std::size_t discrimination_records = 0;
    std::size_t targeted = 0;
    std::size_t self_narration = 0;
    std::size_t unique_discrimination_users = 0;
    double discrimination_rate = 0;               // discrimination / total
    double targeted_proportion = 0;               // targeted / (targeted + self)
    std::optional<double> targeted_self_ratio;    // targeted / self, undefined when self = 0
    std::optional<double> tweets_per_user;        // undefined without discrimination records
    double bot_share = 0;
    long long hate_crime_count = 0;
    CensusCovariates census;
};

/// Thrown when an upstream artifact breaks a count invariant (pipeline exit code 4).
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact per-city counts in registry order. A record whose city is not in the registry,
/// or a discrimination record without delineation, throws InvariantError.
std::vector<CityAggregate> aggregate_cities(const std::vector<ClassifiedRecord>& records, const CityRegistry& registry,
                                            const BotScan* bots = nullptr);
/// Throws InvariantError when a count identity fails.
void check_aggregates(const std::vector<CityAggregate>& aggs, const std::vector<ClassifiedRecord>& records);

std::string aggregates_csv(const std::vector<CityAggregate>& aggs);
std::vector<CityAggregate> load_aggregates_csv(const std::string& contents);

enum class SocialCovariate { proportion, ratio };

/// Hate-crime count regressed on the social-media and census covariates. Cities in
/// `exclude` are dropped, as are cities with an undefined ratio in ratio mode.
DesignMatrix regression_design(const std::vector<CityAggregate>& aggs, SocialCovariate mode,
                               const std::vector<std::string>& exclude = {});

enum class QuartileClass { low, middle, high };
std::string color_name(QuartileClass q);

/// Rank-based 25/50/25 classes; ties are ordered by city key.
std::vector<QuartileClass> quartile_classes(const std::vector<double>& values, const std::vector<std::string>& keys);

struct MapOutput {
    std::string geojson;
    std::vector<std::string> warnings;
};

MapOutput emit_map_data(const std::vector<CityAggregate>& aggs, const CityRegistry& registry);

struct RankedFeature {
    std::uint32_t bucket = 0;
    std::string label;  // most frequent n-gram in the bucket, or "bucket:<id>"
    double contribution = 0;
};

struct CityFeature {
    std::string city_key;
    int rank = 0;
    std::string label;
    double share = 0;           // of the city's discrimination records
    double share_targeted = 0;  // of its targeted records
    double share_self = 0;      // of its self-narration records
};

struct YearComparison {
    std::string city_key;
    std::string label;
    int year_a = 0;
    int year_b = 0;
    std::optional<double> t;
    std::optional<double> p;
};

struct FeatureReport {
    std::vector<RankedFeature> top;
    std::vector<CityFeature> cities;
    std::vector<YearComparison> years;
    std::vector<std::string> warnings;
};

/// Ranks hashed n-gram buckets seen in the discrimination records by embedding . output
/// and reports, for each city, the global top-k features present in its discrimination
/// records. Consecutive-year presence rates per city and feature are compared by t-test.
FeatureReport top_features(const ClassifierModel& model, const std::vector<ClassifiedRecord>& records, int k);

std::string top_features_csv(const FeatureReport& r);
std::string city_features_csv(const FeatureReport& r);
std::string year_stability_csv(const FeatureReport& r);

}  // namespace hatescope
