#include "hatescope/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "hatescope/tokenize.hpp"

namespace hatescope {

using json = nlohmann::ordered_json;

std::vector<CityAggregate> aggregate_cities(const std::vector<ClassifiedRecord>& records, const CityRegistry& registry,
                                            const BotScan* bots) {
    std::vector<CityAggregate> out;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& c : registry.cities()) {
        slot[c.city_key] = out.size();
        CityAggregate a;
        a.city_key = c.city_key;
        a.hate_crime_count = c.hate_crime_count;
        a.census = c.census;
        out.push_back(a);
    }
    std::vector<std::set<std::string>> users(out.size());
    for (const auto& r : records) {
        auto it = slot.find(r.city_key);
        if (it == slot.end()) throw InvariantError("record " + r.record.id + " has unknown city_key '" + r.city_key + "'");
        CityAggregate& a = out[it->second];
        ++a.total_records;
        if (!r.discrimination) continue;
        ++a.discrimination_records;
        if (!r.self_narration) throw InvariantError("discrimination record " + r.record.id + " lacks delineation");
        ++(*r.self_narration ? a.self_narration : a.targeted);
        users[it->second].insert(r.record.user_id);
    }
    std::unordered_map<std::string, double> share;
    if (bots)
        for (const auto& c : bots->cities) share[c.city_key] = c.share;
    for (std::size_t i = 0; i < out.size(); ++i) {
        CityAggregate& a = out[i];
        a.unique_discrimination_users = users[i].size();
        if (a.total_records > 0) a.discrimination_rate = double(a.discrimination_records) / double(a.total_records);
        if (a.discrimination_records > 0) {
            a.targeted_proportion = double(a.targeted) / double(a.discrimination_records);
            a.tweets_per_user = double(a.discrimination_records) / double(a.unique_discrimination_users);
        }
        if (a.self_narration > 0) a.targeted_self_ratio = double(a.targeted) / double(a.self_narration);
        if (auto it = share.find(a.city_key); it != share.end()) a.bot_share = it->second;
    }
    return out;
}

void check_aggregates(const std::vector<CityAggregate>& aggs, const std::vector<ClassifiedRecord>& records) {
    std::size_t total = 0, disc = 0, targeted = 0, self = 0;
    for (const auto& a : aggs) {
        if (a.targeted + a.self_narration != a.discrimination_records)
            throw InvariantError("targeted + self-narration != discrimination for " + a.city_key);
        if (a.discrimination_records > a.total_records)
            throw InvariantError("discrimination exceeds total for " + a.city_key);
        if (a.tweets_per_user && *a.tweets_per_user < 1) throw InvariantError("tweets per user below 1 for " + a.city_key);
        total += a.total_records;
        disc += a.discrimination_records;
        targeted += a.targeted;
        self += a.self_narration;
    }
    std::size_t g_disc = 0, g_targeted = 0, g_self = 0;
    for (const auto& r : records) {
        if (!r.discrimination) continue;
        ++g_disc;
        if (r.self_narration) ++(*r.self_narration ? g_self : g_targeted);
    }
    if (total != records.size() || disc != g_disc || targeted != g_targeted || self != g_self)
        throw InvariantError("city counts do not sum to global counts");
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::optional<double> parse_opt(const std::string& s, const char* field) {
    if (s == "NA") return std::nullopt;
    return parse_double(s, field);
}

const char* kAggregateColumns[] = {"city_key", "total_records", "discrimination_records", "targeted", "self_narration",
                                   "unique_discrimination_users", "discrimination_rate", "targeted_proportion",
                                   "targeted_self_ratio", "tweets_per_user", "bot_share", "hate_crime_count",
                                   "pct_white", "pct_black", "pct_asian", "pct_hispanic_latino", "pct_foreign_born",
                                   "pct_female", "pct_age_18_64", "population_density", "median_income"};

}  // namespace

std::string aggregates_csv(const std::vector<CityAggregate>& aggs) {
    std::vector<std::string> header(std::begin(kAggregateColumns), std::end(kAggregateColumns));
    std::string out = csv_row(header);
    for (const auto& a : aggs) {
        const auto& c = a.census;
        out += csv_row({a.city_key, std::to_string(a.total_records), std::to_string(a.discrimination_records),
                        std::to_string(a.targeted), std::to_string(a.self_narration),
                        std::to_string(a.unique_discrimination_users), format_double(a.discrimination_rate),
                        format_double(a.targeted_proportion), opt(a.targeted_self_ratio), opt(a.tweets_per_user),
                        format_double(a.bot_share), std::to_string(a.hate_crime_count), format_double(c.pct_white),
                        format_double(c.pct_black), format_double(c.pct_asian), format_double(c.pct_hispanic_latino),
                        format_double(c.pct_foreign_born), format_double(c.pct_female), format_double(c.pct_age_18_64),
                        format_double(c.population_density), format_double(c.median_income)});
    }
    return out;
}

std::vector<CityAggregate> load_aggregates_csv(const std::string& contents) {
    std::istringstream in(contents);
    CsvReader reader(in);
    std::vector<std::string> row;
    std::vector<CityAggregate> out;
    if (!reader.next(row)) return out;
    CsvHeader h(row);
    auto num = [&](const char* name) { return parse_double(row[h.at(name)], name); };
    auto count = [&](const char* name) { return static_cast<std::size_t>(parse_int(row[h.at(name)], name)); };
    while (reader.next(row)) {
        if (row.size() != h.size()) throw InputError("aggregates line " + std::to_string(reader.line()) + ": wrong field count");
        CityAggregate a;
        a.city_key = row[h.at("city_key")];
        a.total_records = count("total_records");
        a.discrimination_records = count("discrimination_records");
        a.targeted = count("targeted");
        a.self_narration = count("self_narration");
        a.unique_discrimination_users = count("unique_discrimination_users");
        a.discrimination_rate = num("discrimination_rate");
        a.targeted_proportion = num("targeted_proportion");
        a.targeted_self_ratio = parse_opt(row[h.at("targeted_self_ratio")], "targeted_self_ratio");
        a.tweets_per_user = parse_opt(row[h.at("tweets_per_user")], "tweets_per_user");
        a.bot_share = num("bot_share");
        a.hate_crime_count = parse_int(row[h.at("hate_crime_count")], "hate_crime_count");
        a.census = {num("pct_white"),        num("pct_black"),     num("pct_asian"),
                    num("pct_hispanic_latino"), num("pct_foreign_born"), num("pct_female"),
                    num("pct_age_18_64"),    num("population_density"), num("median_income")};
        out.push_back(std::move(a));
    }
    return out;
}

DesignMatrix regression_design(const std::vector<CityAggregate>& aggs, SocialCovariate mode,
                               const std::vector<std::string>& exclude) {
    const std::set<std::string> skip(exclude.begin(), exclude.end());
    std::vector<std::string> names = {"targeted_pct", "self_narration_pct",
                                      mode == SocialCovariate::proportion ? "targeted_proportion" : "targeted_self_ratio",
                                      "pct_white", "pct_black", "pct_asian", "pct_hispanic_latino", "pct_foreign_born",
                                      "pct_female", "pct_age_18_64", "population_density", "median_income"};
    std::vector<std::vector<double>> cols(names.size());
    std::vector<double> y;
    for (const auto& a : aggs) {
        if (skip.count(a.city_key)) continue;
        if (mode == SocialCovariate::ratio && !a.targeted_self_ratio) continue;
        const double total = a.total_records > 0 ? double(a.total_records) : 1.0;
        const auto& c = a.census;
        const double values[] = {100.0 * double(a.targeted) / total,
                                 100.0 * double(a.self_narration) / total,
                                 mode == SocialCovariate::proportion ? a.targeted_proportion : *a.targeted_self_ratio,
                                 c.pct_white, c.pct_black, c.pct_asian, c.pct_hispanic_latino, c.pct_foreign_born,
                                 c.pct_female, c.pct_age_18_64, c.population_density, c.median_income};
        for (std::size_t j = 0; j < names.size(); ++j) cols[j].push_back(values[j]);
        y.push_back(static_cast<double>(a.hate_crime_count));
    }
    return make_design(names, cols, std::move(y));
}

std::string color_name(QuartileClass q) {
    switch (q) {
        case QuartileClass::low: return "green";
        case QuartileClass::middle: return "yellow";
        case QuartileClass::high: return "red";
    }
    return "yellow";
}

std::vector<QuartileClass> quartile_classes(const std::vector<double>& values, const std::vector<std::string>& keys) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return keys[a] < keys[b];
    });
    const std::size_t quarter = static_cast<std::size_t>(std::llround(double(n) * 0.25));
    std::vector<QuartileClass> out(n, QuartileClass::middle);
    for (std::size_t r = 0; r < n; ++r) {
        if (r < quarter) out[order[r]] = QuartileClass::low;
        else if (r >= n - quarter) out[order[r]] = QuartileClass::high;
    }
    return out;
}

MapOutput emit_map_data(const std::vector<CityAggregate>& aggs, const CityRegistry& registry) {
    MapOutput result;
    std::vector<double> crimes, rates;
    std::vector<std::string> keys;
    for (const auto& a : aggs) {
        crimes.push_back(static_cast<double>(a.hate_crime_count));
        rates.push_back(a.discrimination_rate);
        keys.push_back(a.city_key);
    }
    const auto crime_class = quartile_classes(crimes, keys);
    const auto rate_class = quartile_classes(rates, keys);
    json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = json::array();
    for (std::size_t i = 0; i < aggs.size(); ++i) {
        const auto& a = aggs[i];
        json f;
        f["type"] = "Feature";
        const CityRecord* city = registry.find(a.city_key);
        if (city && city->lat && city->lon) {
            f["geometry"] = {{"type", "Point"}, {"coordinates", {*city->lon, *city->lat}}};
        } else {
            f["geometry"] = nullptr;
            result.warnings.push_back("no coordinates for " + a.city_key);
        }
        json p;
        p["city_key"] = a.city_key;
        p["hate_crime_count"] = a.hate_crime_count;
        p["hate_crime_class"] = color_name(crime_class[i]);
        p["discrimination_rate"] = a.discrimination_rate;
        p["discrimination_rate_class"] = color_name(rate_class[i]);
        p["dot_size_rate"] = a.discrimination_rate;
        p["tweets_per_user"] = a.tweets_per_user ? json(*a.tweets_per_user) : json(nullptr);
        p["dot_size_tweets_per_user"] = a.tweets_per_user ? *a.tweets_per_user : 0.0;
        p["targeted_proportion"] = a.targeted_proportion;
        p["underline"] = a.targeted_proportion > 0.5;
        f["properties"] = p;
        fc["features"].push_back(f);
    }
    result.geojson = fc.dump(1) + "\n";
    return result;
}

FeatureReport top_features(const ClassifierModel& model, const std::vector<ClassifiedRecord>& records, int k) {
    FeatureReport rep;
    std::unordered_map<std::uint32_t, std::map<std::string, std::size_t>> strings;
    std::vector<std::unordered_set<std::uint32_t>> present(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].discrimination) continue;
        for_each_ngram(tokenize(records[i].record.text), model.ngrams, [&](std::uint32_t b, const std::string& s) {
            ++strings[b][s];
            present[i].insert(b);
        });
    }
    std::vector<RankedFeature> all;
    all.reserve(strings.size());
    for (const auto& [bucket, _] : strings) {
        const double* e = model.row(bucket);
        double c = 0;
        for (int d = 0; d < model.dim; ++d) c += e[d] * model.output[d];
        all.push_back({bucket, {}, c});
    }
    std::sort(all.begin(), all.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.contribution != b.contribution) return a.contribution > b.contribution;
        return a.bucket < b.bucket;
    });
    if (k >= 0 && all.size() > static_cast<std::size_t>(k)) all.resize(static_cast<std::size_t>(k));
    for (auto& f : all) {
        auto it = strings.find(f.bucket);
        if (it == strings.end() || it->second.empty()) {
            f.label = "bucket:" + std::to_string(f.bucket);
            rep.warnings.push_back("no recorded n-gram for bucket " + std::to_string(f.bucket));
            continue;
        }
        std::size_t best = 0;
        for (const auto& [s, n] : it->second) {
            if (n > best) {  // map order: ties keep the lexicographically smallest
                best = n;
                f.label = s;
            }
        }
    }
    rep.top = all;

    std::map<std::string, std::vector<std::size_t>> by_city;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].discrimination) by_city[records[i].city_key].push_back(i);
    for (const auto& [city, idx] : by_city) {
        std::size_t n_t = 0, n_s = 0;
        for (auto i : idx) ++(records[i].self_narration.value_or(false) ? n_s : n_t);
        std::map<int, std::vector<std::size_t>> by_year;
        for (auto i : idx) by_year[utc_year(records[i].record.timestamp)].push_back(i);
        for (std::size_t r = 0; r < rep.top.size(); ++r) {
            const auto& f = rep.top[r];
            std::size_t hit = 0, hit_t = 0, hit_s = 0;
            for (auto i : idx) {
                if (!present[i].count(f.bucket)) continue;
                ++hit;
                ++(records[i].self_narration.value_or(false) ? hit_s : hit_t);
            }
            if (hit == 0) continue;
            rep.cities.push_back({city, static_cast<int>(r + 1), f.label, double(hit) / double(idx.size()),
                                  n_t ? double(hit_t) / double(n_t) : 0.0, n_s ? double(hit_s) / double(n_s) : 0.0});
            for (auto ya = by_year.begin(); ya != by_year.end(); ++ya) {
                auto yb = std::next(ya);
                if (yb == by_year.end() || yb->first != ya->first + 1) continue;
                YearComparison cmp{city, f.label, ya->first, yb->first, std::nullopt, std::nullopt};
                auto indicator = [&](const std::vector<std::size_t>& v) {
                    std::vector<double> x;
                    for (auto i : v) x.push_back(present[i].count(f.bucket) ? 1.0 : 0.0);
                    return x;
                };
                const auto xa = indicator(ya->second), xb = indicator(yb->second);
                if (xa.size() >= 2 && xb.size() >= 2) {
                    try {
                        const TTest t = ttest_two_sample(xa, xb);
                        cmp.t = t.t;
                        cmp.p = t.p;
                    } catch (const std::invalid_argument&) {
                        // constant presence in both years: no test
                    }
                }
                rep.years.push_back(cmp);
            }
        }
    }
    return rep;
}

std::string top_features_csv(const FeatureReport& r) {
    std::string out = "rank,bucket,feature,contribution\n";
    for (std::size_t i = 0; i < r.top.size(); ++i)
        out += csv_row({std::to_string(i + 1), std::to_string(r.top[i].bucket), r.top[i].label,
                        format_double(r.top[i].contribution)});
    return out;
}

std::string city_features_csv(const FeatureReport& r) {
    std::string out = "city_key,rank,feature,share,share_targeted,share_self_narration\n";
    for (const auto& c : r.cities)
        out += csv_row({c.city_key, std::to_string(c.rank), c.label, format_double(c.share),
                        format_double(c.share_targeted), format_double(c.share_self)});
    return out;
}

std::string year_stability_csv(const FeatureReport& r) {
    std::string out = "city_key,feature,year_a,year_b,t,p\n";
    for (const auto& y : r.years)
        out += csv_row({y.city_key, y.label, std::to_string(y.year_a), std::to_string(y.year_b), opt(y.t), opt(y.p)});
    return out;
}

}  // namespace hatescope
