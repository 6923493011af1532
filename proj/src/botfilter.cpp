#include "hatescope/botfilter.hpp"

#include <fstream>
#include <map>
#include <set>

#include "hatescope/util.hpp"

namespace hatescope {

BotList load_bot_list(const std::filesystem::path& path, std::string source, std::string period_note) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open bot list " + path.string());
    BotList list{std::move(source), std::move(period_note), {}};
    std::string line;
    while (std::getline(in, line)) {
        std::string id = trim(line);
        if (id.empty() || id[0] == '#') continue;
        list.user_ids.insert(id);
    }
    return list;
}

std::vector<BotList> load_bot_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw InputError("cannot open bot manifest " + manifest.string());
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) return {};
    CsvHeader header(row);
    const auto c_source = header.at("source");
    const auto c_path = header.at("path");
    const auto c_note = header.at("period_note");
    std::vector<BotList> lists;
    while (reader.next(row)) {
        if (row.size() != header.size()) throw InputError("bot manifest line " + std::to_string(reader.line()) + ": wrong field count");
        std::filesystem::path p = trim(row[c_path]);
        if (p.is_relative()) p = manifest.parent_path() / p;
        lists.push_back(load_bot_list(p, trim(row[c_source]), row[c_note]));
    }
    return lists;
}

BotIndex::BotIndex(const std::vector<BotList>& lists) {
    for (const auto& l : lists) ids_.insert(l.user_ids.begin(), l.user_ids.end());
}

BotScan flag_bots(const std::vector<ClassifiedRecord>& records, const BotIndex& bots,
                  const std::vector<std::string>& city_keys) {
    BotScan scan;
    scan.flags.resize(records.size());
    std::map<std::string, std::set<std::string>> users;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        scan.flags[i] = bots.contains(r.record.user_id);
        if (r.discrimination) users[r.city_key].insert(r.record.user_id);
    }
    for (const auto& key : city_keys) {
        CityBotSummary s;
        s.city_key = key;
        auto it = users.find(key);
        if (it != users.end()) {
            s.discrimination_users = it->second.size();
            for (const auto& u : it->second) s.bot_users += bots.contains(u);
            s.share = static_cast<double>(s.bot_users) / static_cast<double>(s.discrimination_users);
        }
        scan.cities.push_back(s);
    }
    return scan;
}

std::string bot_summary_csv(const BotScan& scan) {
    std::string out = "city_key,discrimination_users,bot_users,bot_share\n";
    for (const auto& c : scan.cities)
        out += csv_row({c.city_key, std::to_string(c.discrimination_users), std::to_string(c.bot_users), format_double(c.share)});
    return out;
}

}  // namespace hatescope
