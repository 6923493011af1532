#include "hatescope/lexicon.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

#include "hatescope/tokenize.hpp"
#include "hatescope/util.hpp"

namespace hatescope {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace

std::vector<LexiconEntry> load_lexicon(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) return {};
    CsvHeader header(row);
    const auto c_phrase = header.at("phrase");
    const auto c_sight = header.at("sightings");
    const auto c_nat = header.at("nationality_ethnicity");
    const auto c_eng = header.at("english");
    const auto c_exc = header.at("excluded");
    std::vector<LexiconEntry> entries;
    while (reader.next(row)) {
        const std::string where = "lexicon line " + std::to_string(reader.line()) + ": ";
        if (row.size() != header.size()) throw InputError(where + "wrong field count");
        LexiconEntry e;
        auto tokens = tokenize(row[c_phrase]);
        if (tokens.empty() || tokens.size() > 4) throw InputError(where + "phrase must have 1-4 tokens");
        e.phrase = join_tokens(tokens);
        try {
            e.sightings = parse_int(row[c_sight], "sightings");
            e.nationality_or_ethnicity = parse_bool(row[c_nat]);
            e.english = parse_bool(row[c_eng]);
            e.excluded_colloquial = parse_bool(row[c_exc]);
        } catch (const InputError& err) {
            throw InputError(where + err.what());
        }
        if (e.sightings < 0) throw InputError(where + "negative sightings");
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open lexicon " + path.string());
    return load_lexicon(in);
}

std::string serialize_lexicon(const std::vector<LexiconEntry>& entries) {
    std::string out = "phrase,sightings,nationality_ethnicity,english,excluded\n";
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    for (const auto& e : entries)
        out += csv_row({e.phrase, std::to_string(e.sightings), b(e.nationality_or_ethnicity), b(e.english),
                        b(e.excluded_colloquial)});
    return out;
}

std::vector<LexiconEntry> filter_lexicon(const std::vector<LexiconEntry>& entries, long long min_sightings,
                                         bool require_discrimination) {
    std::vector<LexiconEntry> kept;
    for (const auto& e : entries) {
        if (e.sightings <= min_sightings) continue;
        if (!e.english || e.excluded_colloquial) continue;
        if (require_discrimination && !e.nationality_or_ethnicity) continue;
        kept.push_back(e);
    }
    return kept;
}

// ---------------------------------------------------------------------------

PhraseMatcher::PhraseMatcher(const std::vector<std::string>& phrases) {
    for (const auto& p : phrases) {
        auto tokens = tokenize(p);
        if (tokens.empty()) continue;
        int node = 0;
        for (const auto& t : tokens) {
            auto [it, inserted] = vocab_.emplace(t, static_cast<int>(vocab_.size()));
            int id = it->second;
            auto child = nodes_[node].next.find(id);
            if (child == nodes_[node].next.end()) {
                nodes_.emplace_back();
                int created = static_cast<int>(nodes_.size()) - 1;
                nodes_[node].next.emplace(id, created);
                node = created;
            } else {
                node = child->second;
            }
        }
        if (!nodes_[node].out.empty()) continue;  // duplicate phrase
        nodes_[node].out.push_back(static_cast<int>(phrases_.size()));
        phrases_.push_back(join_tokens(tokens));
        lengths_.push_back(tokens.size());
    }

    // Breadth-first failure links; outputs inherit along the failure chain.
    std::deque<int> queue;
    for (auto& [id, child] : nodes_[0].next) {
        nodes_[child].fail = 0;
        queue.push_back(child);
    }
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (auto& [id, v] : nodes_[u].next) {
            int f = nodes_[u].fail;
            while (f != 0 && !nodes_[f].next.count(id)) f = nodes_[f].fail;
            auto it = nodes_[f].next.find(id);
            nodes_[v].fail = (it != nodes_[f].next.end() && it->second != v) ? it->second : 0;
            const auto& inherited = nodes_[nodes_[v].fail].out;
            nodes_[v].out.insert(nodes_[v].out.end(), inherited.begin(), inherited.end());
            queue.push_back(v);
        }
    }
}

std::vector<PhraseMatch> PhraseMatcher::scan(const std::vector<std::string>& tokens) const {
    std::vector<PhraseMatch> matches;
    if (phrases_.empty()) return matches;
    int node = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto v = vocab_.find(tokens[i]);
        if (v == vocab_.end()) {
            node = 0;
            continue;
        }
        while (node != 0 && !nodes_[node].next.count(v->second)) node = nodes_[node].fail;
        auto it = nodes_[node].next.find(v->second);
        node = it == nodes_[node].next.end() ? 0 : it->second;
        for (int p : nodes_[node].out) {
            std::size_t len = lengths_[p];
            matches.push_back({i + 1 - len, len, static_cast<std::size_t>(p)});
        }
    }
    std::sort(matches.begin(), matches.end(), [](const PhraseMatch& a, const PhraseMatch& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.length != b.length) return a.length > b.length;
        return a.phrase < b.phrase;
    });
    return matches;
}

PhraseMatcher make_matcher(const std::vector<LexiconEntry>& lexicon) {
    std::vector<std::string> phrases;
    phrases.reserve(lexicon.size());
    for (const auto& e : lexicon) phrases.push_back(e.phrase);
    return PhraseMatcher(phrases);
}

std::vector<std::string> match_keywords(std::string_view text, const PhraseMatcher& matcher) {
    std::vector<std::string> out;
    for (const auto& m : matcher.scan(tokenize(text))) out.push_back(matcher.phrases()[m.phrase]);
    return out;
}

std::vector<std::string> match_keywords(std::string_view text, const std::vector<LexiconEntry>& lexicon) {
    return match_keywords(text, make_matcher(lexicon));
}

}  // namespace hatescope
