#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hatescope/lexicon.hpp"

namespace hatescope {

struct CategoryLexicon {
    std::string name;
    std::vector<std::string> terms;  // lowercase; multi-word terms allowed
};

/// Nine-category preset: affect (positive/negative emotion, disappointment, sadness,
/// aggression, violence), socio-economic status (work, money) and culture (night).
const std::vector<std::string>& core_category_preset();

/// Category file: one `category:term1,term2,...` per line; '#' lines are comments.
std::vector<CategoryLexicon> load_categories(std::istream& in);
std::vector<CategoryLexicon> load_categories(const std::filesystem::path& path);
/// Subset in the requested order; throws std::invalid_argument for an unknown name.
std::vector<CategoryLexicon> select_categories(const std::vector<CategoryLexicon>& all,
                                               const std::vector<std::string>& names);

/// Per-category fraction of record tokens covered by a category term.
using CategoryProfile = std::vector<double>;

/// Immutable scorer; one combined phrase automaton over all category terms.
class CategoryScorer {
public:
    explicit CategoryScorer(std::vector<CategoryLexicon> categories);

    CategoryProfile score(const std::vector<std::string>& tokens) const;
    CategoryProfile score(std::string_view text) const;

    const std::vector<CategoryLexicon>& categories() const { return categories_; }
    std::size_t size() const { return categories_.size(); }

private:
    std::vector<CategoryLexicon> categories_;
    PhraseMatcher matcher_;
    std::vector<std::vector<std::size_t>> phrase_categories_;
};

/// Mergeable sum of profiles.
struct ProfileAccumulator {
    std::vector<double> sum;
    std::size_t count = 0;

    void add(const CategoryProfile& p);
    void merge(const ProfileAccumulator& other);
    CategoryProfile mean() const;
};

struct GroupRatio {
    std::vector<std::string> categories;
    CategoryProfile mean_a;
    CategoryProfile mean_b;
    std::vector<std::optional<double>> ratio;  // nullopt = undefined (group-b mean is 0)
    double grand_mean = 0;                     // mean of the defined ratios
    std::size_t defined = 0;
};

/// Per-category mean(a) / mean(b). Throws std::invalid_argument for an empty group.
GroupRatio group_ratio(const std::vector<CategoryProfile>& a, const std::vector<CategoryProfile>& b,
                       const std::vector<std::string>& category_names);

struct VolumeBucket {
    std::string name;
    std::size_t min_records = 1;
    std::size_t max_records = 1;  // inclusive
};

/// Users with exactly 1, 2-21, and more than 21 records.
std::vector<VolumeBucket> default_volume_buckets();

struct BucketProfile {
    std::string name;
    std::size_t users = 0;
    std::size_t records = 0;
    CategoryProfile mean;  // over the bucket's records
};

struct BucketCorrelation {
    std::string a, b;
    std::optional<double> rho;  // nullopt when a profile has zero variance
    std::optional<double> p;
};

struct UserProfiles {
    std::vector<BucketProfile> buckets;  // empty buckets omitted
    std::vector<BucketCorrelation> correlations;
    std::vector<std::string> warnings;
};

/// Buckets users by record volume and correlates bucket mean profiles with Spearman's rho.
UserProfiles user_profiles(const std::map<std::string, std::vector<CategoryProfile>>& by_user,
                           const std::vector<VolumeBucket>& buckets = default_volume_buckets());

std::string profiles_csv(const std::vector<std::string>& ids, const std::vector<CategoryProfile>& profiles,
                         const std::vector<std::string>& category_names);
std::string group_ratio_csv(const GroupRatio& r);
std::string user_profiles_csv(const UserProfiles& u, const std::vector<std::string>& category_names);
std::string user_correlations_csv(const UserProfiles& u);

}  // namespace hatescope
