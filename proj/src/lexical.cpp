#include "hatescope/lexical.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "hatescope/stats.hpp"
#include "hatescope/tokenize.hpp"
#include "hatescope/util.hpp"

namespace hatescope {

const std::vector<std::string>& core_category_preset() {
    static const std::vector<std::string> preset{"positive_emotion", "negative_emotion", "disappointment",
                                                 "sadness",          "aggression",       "violence",
                                                 "work",             "money",            "night"};
    return preset;
}

std::vector<CategoryLexicon> load_categories(std::istream& in) {
    std::vector<CategoryLexicon> out;
    std::set<std::string> names;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto colon = t.find(':');
        if (colon == std::string::npos)
            throw InputError("categories line " + std::to_string(lineno) + ": expected 'category:terms'");
        CategoryLexicon c;
        c.name = trim(t.substr(0, colon));
        for (auto& term : split(t.substr(colon + 1), ',')) {
            std::string norm = normalize_label(term);
            if (!norm.empty()) c.terms.push_back(norm);
        }
        if (c.name.empty() || c.terms.empty())
            throw InputError("categories line " + std::to_string(lineno) + ": empty name or term list");
        if (!names.insert(c.name).second)
            throw InputError("categories line " + std::to_string(lineno) + ": duplicate category " + c.name);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<CategoryLexicon> load_categories(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open categories " + path.string());
    return load_categories(in);
}

std::vector<CategoryLexicon> select_categories(const std::vector<CategoryLexicon>& all,
                                               const std::vector<std::string>& names) {
    std::vector<CategoryLexicon> out;
    for (const auto& n : names) {
        auto it = std::find_if(all.begin(), all.end(), [&](const CategoryLexicon& c) { return c.name == n; });
        if (it == all.end()) throw std::invalid_argument("unknown category " + n);
        out.push_back(*it);
    }
    return out;
}

// ---------------------------------------------------------------------------

CategoryScorer::CategoryScorer(std::vector<CategoryLexicon> categories) : categories_(std::move(categories)) {
    std::vector<std::string> all_terms;
    for (const auto& c : categories_) all_terms.insert(all_terms.end(), c.terms.begin(), c.terms.end());
    matcher_ = PhraseMatcher(all_terms);
    // Map each distinct tokenized phrase back to every category that lists it.
    phrase_categories_.resize(matcher_.phrases().size());
    for (std::size_t ci = 0; ci < categories_.size(); ++ci)
        for (const auto& term : categories_[ci].terms) {
            auto tokens = tokenize(term);
            std::string joined;
            for (std::size_t i = 0; i < tokens.size(); ++i) joined += (i ? " " : "") + tokens[i];
            const auto& phrases = matcher_.phrases();
            auto it = std::find(phrases.begin(), phrases.end(), joined);
            if (it == phrases.end()) continue;
            auto& cats = phrase_categories_[static_cast<std::size_t>(it - phrases.begin())];
            if (std::find(cats.begin(), cats.end(), ci) == cats.end()) cats.push_back(ci);
        }
}

CategoryProfile CategoryScorer::score(const std::vector<std::string>& tokens) const {
    const std::size_t k = categories_.size();
    CategoryProfile profile(k, 0.0);
    if (tokens.empty()) return profile;
    // covered[c * n + i]: token i lies inside some term of category c
    const std::size_t n = tokens.size();
    std::vector<char> covered(k * n, 0);
    for (const auto& m : matcher_.scan(tokens))
        for (std::size_t c : phrase_categories_[m.phrase])
            for (std::size_t i = m.start; i < m.start + m.length; ++i) covered[c * n + i] = 1;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += covered[c * n + i];
        profile[c] = static_cast<double>(hits) / static_cast<double>(n);
    }
    return profile;
}

CategoryProfile CategoryScorer::score(std::string_view text) const { return score(tokenize(text)); }

void ProfileAccumulator::add(const CategoryProfile& p) {
    if (sum.empty()) sum.assign(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) sum[i] += p[i];
    ++count;
}

void ProfileAccumulator::merge(const ProfileAccumulator& other) {
    if (other.count == 0) return;
    if (sum.empty()) sum.assign(other.sum.size(), 0.0);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += other.sum[i];
    count += other.count;
}

CategoryProfile ProfileAccumulator::mean() const {
    CategoryProfile m(sum.size(), 0.0);
    if (count == 0) return m;
    for (std::size_t i = 0; i < sum.size(); ++i) m[i] = sum[i] / static_cast<double>(count);
    return m;
}

// ---------------------------------------------------------------------------

GroupRatio group_ratio(const std::vector<CategoryProfile>& a, const std::vector<CategoryProfile>& b,
                       const std::vector<std::string>& category_names) {
    if (a.empty() || b.empty()) throw std::invalid_argument("group_ratio: empty group");
    ProfileAccumulator acc_a, acc_b;
    for (const auto& p : a) acc_a.add(p);
    for (const auto& p : b) acc_b.add(p);
    GroupRatio r;
    r.categories = category_names;
    r.mean_a = acc_a.mean();
    r.mean_b = acc_b.mean();
    double total = 0;
    for (std::size_t c = 0; c < r.mean_a.size(); ++c) {
        if (r.mean_b[c] == 0) {
            r.ratio.push_back(std::nullopt);
            continue;
        }
        const double v = r.mean_a[c] / r.mean_b[c];
        r.ratio.push_back(v);
        total += v;
        ++r.defined;
    }
    r.grand_mean = r.defined ? total / static_cast<double>(r.defined) : 0.0;
    return r;
}

std::vector<VolumeBucket> default_volume_buckets() {
    return {{"1", 1, 1}, {"2-21", 2, 21}, {">21", 22, static_cast<std::size_t>(-1)}};
}

UserProfiles user_profiles(const std::map<std::string, std::vector<CategoryProfile>>& by_user,
                           const std::vector<VolumeBucket>& buckets) {
    UserProfiles out;
    for (const auto& b : buckets) {
        ProfileAccumulator acc;
        BucketProfile bp;
        bp.name = b.name;
        for (const auto& [user, profiles] : by_user) {
            if (profiles.size() < b.min_records || profiles.size() > b.max_records) continue;
            ++bp.users;
            for (const auto& p : profiles) acc.add(p);
        }
        if (bp.users == 0) {
            out.warnings.push_back("volume bucket " + b.name + " is empty; omitted");
            continue;
        }
        bp.records = acc.count;
        bp.mean = acc.mean();
        out.buckets.push_back(std::move(bp));
    }
    for (std::size_t i = 0; i < out.buckets.size(); ++i)
        for (std::size_t j = i + 1; j < out.buckets.size(); ++j) {
            BucketCorrelation c{out.buckets[i].name, out.buckets[j].name, std::nullopt, std::nullopt};
            try {
                auto s = spearman(out.buckets[i].mean, out.buckets[j].mean);
                c.rho = s.r;
                c.p = s.p;
            } catch (const std::invalid_argument& e) {
                out.warnings.push_back("correlation " + c.a + " vs " + c.b + ": " + e.what());
            }
            out.correlations.push_back(c);
        }
    return out;
}

// ---------------------------------------------------------------------------

std::string profiles_csv(const std::vector<std::string>& ids, const std::vector<CategoryProfile>& profiles,
                         const std::vector<std::string>& category_names) {
    std::vector<std::string> header{"id"};
    header.insert(header.end(), category_names.begin(), category_names.end());
    std::string out = csv_row(header);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        std::vector<std::string> row{ids[i]};
        for (double v : profiles[i]) row.push_back(format_double(v));
        out += csv_row(row);
    }
    return out;
}

std::string group_ratio_csv(const GroupRatio& r) {
    std::string out = "category,mean_a,mean_b,ratio\n";
    for (std::size_t c = 0; c < r.categories.size(); ++c)
        out += csv_row({r.categories[c], format_double(r.mean_a[c]), format_double(r.mean_b[c]),
                        r.ratio[c] ? format_double(*r.ratio[c]) : "undefined"});
    out += csv_row({"(grand_mean)", "", "", format_double(r.grand_mean)});
    return out;
}

std::string user_profiles_csv(const UserProfiles& u, const std::vector<std::string>& category_names) {
    std::vector<std::string> header{"bucket", "users", "records"};
    header.insert(header.end(), category_names.begin(), category_names.end());
    std::string out = csv_row(header);
    for (const auto& b : u.buckets) {
        std::vector<std::string> row{b.name, std::to_string(b.users), std::to_string(b.records)};
        for (double v : b.mean) row.push_back(format_double(v));
        out += csv_row(row);
    }
    return out;
}

std::string user_correlations_csv(const UserProfiles& u) {
    std::string out = "bucket_a,bucket_b,rho,p\n";
    for (const auto& c : u.correlations)
        out += csv_row({c.a, c.b, c.rho ? format_double(*c.rho) : "NA", c.p ? format_double(*c.p) : "NA"});
    return out;
}

}  // namespace hatescope
