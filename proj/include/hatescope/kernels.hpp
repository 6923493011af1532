#pragma once

#include <string>
#include <vector>

#include "hatescope/classifier.hpp"
#include "hatescope/delineate.hpp"
#include "hatescope/lexical.hpp"
#include "hatescope/util.hpp"

// Record-parallel batch kernels. Each writes results by input index, so the OpenMP
// path and the serial reference produce identical output for any thread count.

namespace hatescope {

std::vector<FeatureVector> featurize_batch(const std::vector<std::string>& texts, const NgramConfig& cfg,
                                           Exec exec = Exec::parallel);

std::vector<double> score_batch(const ClassifierModel& model, const std::vector<std::string>& texts,
                                Exec exec = Exec::parallel);

std::vector<CategoryProfile> profile_batch(const CategoryScorer& scorer, const std::vector<std::string>& texts,
                                           Exec exec = Exec::parallel);

std::vector<PronounCounts> pronoun_batch(const std::vector<std::string>& texts, const PronounLists& lists,
                                         Exec exec = Exec::parallel);

/// Mean profile computed from per-shard accumulators merged in shard order.
CategoryProfile mean_profile_sharded(const std::vector<CategoryProfile>& profiles, std::size_t shards);

}  // namespace hatescope
