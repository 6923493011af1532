#pragma once

#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include "hatescope/corpus.hpp"

namespace hatescope {

struct BotList {
    std::string source;
    std::string period_note;
    std::unordered_set<std::string> user_ids;
};

/// Plain-text id list, one user id per line; blank lines and '#' lines ignored.
BotList load_bot_list(const std::filesystem::path& path, std::string source, std::string period_note = {});
/// Manifest CSV source,path,period_note. Relative paths resolve against the manifest's directory.
std::vector<BotList> load_bot_manifest(const std::filesystem::path& manifest);

/// Deduplicated union of the lists; immutable after construction.
class BotIndex {
public:
    BotIndex() = default;
    explicit BotIndex(const std::vector<BotList>& lists);
    bool contains(const std::string& user_id) const { return ids_.count(user_id) != 0; }
    std::size_t size() const { return ids_.size(); }

private:
    std::unordered_set<std::string> ids_;
};

struct CityBotSummary {
    std::string city_key;
    std::size_t discrimination_users = 0;
    std::size_t bot_users = 0;
    double share = 0;  // bot_users / discrimination_users, 0 when there are none
};

struct BotScan {
    std::vector<bool> flags;  // parallel to the input records
    std::vector<CityBotSummary> cities;
};

/// Flags records whose user id is listed and summarizes, per city, the share of
/// discrimination-posting users that are listed bots. Records are never dropped.
BotScan flag_bots(const std::vector<ClassifiedRecord>& records, const BotIndex& bots,
                  const std::vector<std::string>& city_keys);

std::string bot_summary_csv(const BotScan& scan);

}  // namespace hatescope
