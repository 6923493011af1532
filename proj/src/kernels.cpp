#include "hatescope/kernels.hpp"

#include <algorithm>

#include "hatescope/tokenize.hpp"

namespace hatescope {

namespace {

template <typename Out, typename Fn>
std::vector<Out> map_indexed(std::size_t n, Exec exec, Fn&& fn) {
    std::vector<Out> out(n);
    const long long count = static_cast<long long>(n);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 256)
        for (long long i = 0; i < count; ++i) out[i] = fn(static_cast<std::size_t>(i));
    } else {
        for (long long i = 0; i < count; ++i) out[i] = fn(static_cast<std::size_t>(i));
    }
    return out;
}

}  // namespace

std::vector<FeatureVector> featurize_batch(const std::vector<std::string>& texts, const NgramConfig& cfg, Exec exec) {
    return map_indexed<FeatureVector>(texts.size(), exec, [&](std::size_t i) { return featurize(texts[i], cfg); });
}

std::vector<double> score_batch(const ClassifierModel& model, const std::vector<std::string>& texts, Exec exec) {
    return map_indexed<double>(texts.size(), exec, [&](std::size_t i) { return model.predict(texts[i]); });
}

std::vector<CategoryProfile> profile_batch(const CategoryScorer& scorer, const std::vector<std::string>& texts,
                                           Exec exec) {
    return map_indexed<CategoryProfile>(texts.size(), exec, [&](std::size_t i) { return scorer.score(texts[i]); });
}

std::vector<PronounCounts> pronoun_batch(const std::vector<std::string>& texts, const PronounLists& lists, Exec exec) {
    return map_indexed<PronounCounts>(texts.size(), exec, [&](std::size_t i) { return count_pronouns(texts[i], lists); });
}

CategoryProfile mean_profile_sharded(const std::vector<CategoryProfile>& profiles, std::size_t shards) {
    if (shards == 0) shards = 1;
    std::vector<ProfileAccumulator> acc(shards);
    const std::size_t per = (profiles.size() + shards - 1) / shards;
    const long long s_count = static_cast<long long>(shards);
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < s_count; ++s) {
        const std::size_t begin = static_cast<std::size_t>(s) * per;
        const std::size_t end = std::min(profiles.size(), begin + per);
        for (std::size_t i = begin; i < end; ++i) acc[s].add(profiles[i]);
    }
    ProfileAccumulator total;
    for (const auto& a : acc) total.merge(a);
    return total.mean();
}

}  // namespace hatescope
