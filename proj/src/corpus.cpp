#include "hatescope/corpus.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace hatescope {

using ordered_json = nlohmann::ordered_json;

bool CityRegistry::add(CityRecord city) {
    if (by_key_.count(city.city_key)) return false;
    std::size_t idx = cities_.size();
    by_key_.emplace(city.city_key, idx);
    for (const auto& a : city.aliases) by_alias_.emplace(normalize_label(a), idx);
    cities_.push_back(std::move(city));
    return true;
}

void CityRegistry::forget_alias(const std::string& normalized_alias) { by_alias_.erase(normalized_alias); }

const CityRecord* CityRegistry::find_by_alias(std::string_view place_name) const {
    auto it = by_alias_.find(normalize_label(place_name));
    return it == by_alias_.end() ? nullptr : &cities_[it->second];
}

const CityRecord* CityRegistry::find(std::string_view city_key) const {
    auto it = by_key_.find(std::string(city_key));
    return it == by_key_.end() ? nullptr : &cities_[it->second];
}

// ---------------------------------------------------------------------------

namespace {

struct PctColumn {
    const char* name;
    double CensusCovariates::*field;
};

constexpr PctColumn kPctColumns[] = {
    {"pct_white", &CensusCovariates::pct_white},
    {"pct_black", &CensusCovariates::pct_black},
    {"pct_asian", &CensusCovariates::pct_asian},
    {"pct_hispanic_latino", &CensusCovariates::pct_hispanic_latino},
    {"pct_foreign_born", &CensusCovariates::pct_foreign_born},
    {"pct_female", &CensusCovariates::pct_female},
    {"pct_age_18_64", &CensusCovariates::pct_age_18_64},
};

}  // namespace

RegistryLoad load_city_registry(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) throw InputError("city registry: empty file");
    CsvHeader header(row);
    const std::size_t c_key = header.at("city_key");
    const std::size_t c_aliases = header.at("aliases");
    const std::size_t c_crimes = header.at("hate_crimes");
    std::vector<std::size_t> c_pct;
    for (const auto& p : kPctColumns) c_pct.push_back(header.at(p.name));
    const std::size_t c_density = header.at("population_density");
    const std::size_t c_income = header.at("median_income");
    const auto c_lat = header.find("lat");
    const auto c_lon = header.find("lon");

    RegistryLoad out;
    std::vector<std::pair<CityRecord, std::size_t>> accepted;
    std::set<std::string> keys;
    while (reader.next(row)) {
        const std::size_t line = reader.line();
        auto reject = [&](std::string reason) { out.errors.push_back({line, std::move(reason)}); };
        if (row.size() != header.size()) {
            reject("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(row.size()));
            continue;
        }
        try {
            CityRecord city;
            city.city_key = trim(row[c_key]);
            if (city.city_key.empty()) {
                reject("city_key: empty");
                continue;
            }
            for (auto& a : split(row[c_aliases], '|'))
                if (!normalize_label(a).empty()) city.aliases.push_back(trim(a));
            if (city.aliases.empty()) {
                reject("aliases: empty");
                continue;
            }
            city.hate_crime_count = parse_int(row[c_crimes], "hate_crimes");
            if (city.hate_crime_count < 0) {
                reject("hate_crimes: negative");
                continue;
            }
            bool ok = true;
            for (std::size_t i = 0; i < std::size(kPctColumns); ++i) {
                double v = parse_double(row[c_pct[i]], kPctColumns[i].name);
                if (v < 0 || v > 100) {
                    reject(std::string(kPctColumns[i].name) + ": out of [0,100]");
                    ok = false;
                    break;
                }
                city.census.*kPctColumns[i].field = v;
            }
            if (!ok) continue;
            city.census.population_density = parse_double(row[c_density], "population_density");
            city.census.median_income = parse_double(row[c_income], "median_income");
            if (city.census.population_density <= 0) {
                reject("population_density: not positive");
                continue;
            }
            if (city.census.median_income <= 0) {
                reject("median_income: not positive");
                continue;
            }
            if (c_lat && c_lon && !trim(row[*c_lat]).empty() && !trim(row[*c_lon]).empty()) {
                city.lat = parse_double(row[*c_lat], "lat");
                city.lon = parse_double(row[*c_lon], "lon");
            }
            if (!keys.insert(city.city_key).second) {
                reject("city_key: duplicate '" + city.city_key + "'");
                continue;
            }
            accepted.emplace_back(std::move(city), line);
        } catch (const InputError& e) {
            reject(e.what());
        }
    }

    // Aliases claimed by more than one city are ambiguous and dropped everywhere.
    std::map<std::string, std::set<std::string>> owners;
    for (const auto& [city, line] : accepted)
        for (const auto& a : city.aliases) owners[normalize_label(a)].insert(city.city_key);
    for (auto& [city, line] : accepted) {
        std::vector<std::string> kept;
        for (const auto& a : city.aliases) {
            if (owners[normalize_label(a)].size() > 1) {
                out.errors.push_back({line, "aliases: ambiguous alias '" + a + "' dropped"});
            } else {
                kept.push_back(a);
            }
        }
        if (kept.empty()) {
            out.errors.push_back({line, "aliases: no unambiguous alias left"});
            continue;
        }
        city.aliases = std::move(kept);
        out.registry.add(std::move(city));
    }
    return out;
}

RegistryLoad load_city_registry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open city registry " + path.string());
    return load_city_registry(in);
}

// ---------------------------------------------------------------------------

TextRecord parse_record_line(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
        throw InputError("malformed JSON");
    }
    if (!j.is_object()) throw InputError("record is not an object");
    auto str = [&](const char* key) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) throw InputError(std::string("missing field ") + key);
        if (it->is_string()) return it->get<std::string>();
        if (it->is_number_integer()) return std::to_string(it->get<long long>());
        throw InputError(std::string("field ") + key + " is not a string");
    };
    TextRecord r;
    r.id = str("id");
    if (trim(r.id).empty()) throw InputError("empty id");
    r.text = str("text");
    if (trim(r.text).empty()) throw InputError("empty text");
    auto ts = parse_rfc3339(str("created_at"));
    if (!ts) throw InputError("created_at is not RFC 3339");
    r.timestamp = *ts;
    auto place = j.find("place");
    if (place != j.end() && place->is_object()) {
        auto full = place->find("full_name");
        if (full == place->end() || !full->is_string()) throw InputError("place object without full_name");
        r.place_name = full->get<std::string>();
    } else {
        r.place_name = str("place");
    }
    r.user_id = str("user_id");
    return r;
}

std::string record_to_json(const TextRecord& r, const std::string& city_key) {
    ordered_json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["created_at"] = format_rfc3339(r.timestamp);
    j["place"] = r.place_name;
    j["user_id"] = r.user_id;
    j["city_key"] = city_key;
    return j.dump();
}

namespace {

enum class LineStatus { matched, unmatched, out_of_window, rejected };

struct LineResult {
    LineStatus status = LineStatus::rejected;
    TextRecord record;
    std::string city_key;
    std::string reason;
};

LineResult process_line(const std::string& line, const CityRegistry& registry, const IngestOptions& opt) {
    LineResult res;
    try {
        res.record = parse_record_line(line);
    } catch (const InputError& e) {
        res.reason = e.what();
        return res;
    }
    if (res.record.timestamp < opt.window_start || res.record.timestamp > opt.window_end) {
        res.status = LineStatus::out_of_window;
        return res;
    }
    if (const CityRecord* city = registry.find_by_alias(res.record.place_name)) {
        res.status = LineStatus::matched;
        res.city_key = city->city_key;
    } else {
        res.status = LineStatus::unmatched;
    }
    return res;
}

}  // namespace

IngestResult ingest_lines(const std::vector<std::string>& lines, const CityRegistry& registry,
                          const IngestOptions& options, Exec exec) {
    const long long n = static_cast<long long>(lines.size());
    std::vector<LineResult> results(lines.size());
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) results[i] = process_line(lines[i], registry, options);
    } else {
        for (long long i = 0; i < n; ++i) results[i] = process_line(lines[i], registry, options);
    }

    IngestResult out;
    out.total_lines = lines.size();
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < results.size(); ++i) {
        LineResult& r = results[i];
        if (r.status != LineStatus::rejected && !seen.insert(r.record.id).second) {
            r.status = LineStatus::rejected;
            r.reason = "duplicate id " + r.record.id;
        }
        switch (r.status) {
            case LineStatus::rejected:
                ++out.rejected;
                out.rejects.push_back({i + 1, std::move(r.reason)});
                break;
            case LineStatus::out_of_window:
                ++out.out_of_window;
                break;
            case LineStatus::unmatched:
                ++out.unmatched;
                break;
            case LineStatus::matched:
                ++out.matched;
                out.records.push_back({std::move(r.record), std::move(r.city_key)});
                break;
        }
    }
    return out;
}

std::string classified_to_json(const ClassifiedRecord& r) {
    ordered_json j;
    j["id"] = r.record.id;
    j["text"] = r.record.text;
    j["created_at"] = format_rfc3339(r.record.timestamp);
    j["place"] = r.record.place_name;
    j["user_id"] = r.record.user_id;
    j["city_key"] = r.city_key;
    j["score"] = r.score;
    j["discrimination"] = r.discrimination;
    if (r.self_narration) j["delineation"] = *r.self_narration ? "self_narration" : "targeted";
    j["is_bot"] = r.is_bot;
    return j.dump();
}

ClassifiedRecord classified_from_json(std::string_view line) {
    ClassifiedRecord r;
    r.record = parse_record_line(line);
    ordered_json j = ordered_json::parse(line);
    r.city_key = j.value("city_key", "");
    r.score = j.value("score", 0.0);
    r.discrimination = j.value("discrimination", false);
    if (auto it = j.find("delineation"); it != j.end() && it->is_string()) {
        const std::string d = it->get<std::string>();
        if (d != "self_narration" && d != "targeted") throw InputError("bad delineation '" + d + "'");
        r.self_narration = d == "self_narration";
    }
    r.is_bot = j.value("is_bot", false);
    return r;
}

std::vector<ClassifiedRecord> load_classified(const std::filesystem::path& path) {
    std::vector<ClassifiedRecord> out;
    std::size_t lineno = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        try {
            out.push_back(classified_from_json(line));
        } catch (const std::exception& e) {
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string serialize_classified(const std::vector<ClassifiedRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += classified_to_json(r);
        out.push_back('\n');
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& contents) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < contents.size()) {
        std::size_t end = contents.find('\n', start);
        if (end == std::string::npos) end = contents.size();
        std::string line = contents.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

IngestResult ingest_corpus(const std::filesystem::path& path, const CityRegistry& registry,
                           const IngestOptions& options, Exec exec) {
    return ingest_lines(split_lines(read_file(path)), registry, options, exec);
}

std::string serialize_ingest(const IngestResult& result) {
    std::string out;
    for (const auto& r : result.records) {
        out += record_to_json(r.record, r.city_key);
        out.push_back('\n');
    }
    return out;
}

std::string serialize_rejects(const IngestResult& result) {
    std::string out = "line_number,reason\n";
    for (const auto& r : result.rejects) out += csv_row({std::to_string(r.line), r.reason});
    return out;
}

}  // namespace hatescope
