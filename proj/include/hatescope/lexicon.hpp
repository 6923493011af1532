#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

namespace hatescope {

struct LexiconEntry {
    std::string phrase;  // lowercase, tokens joined by single spaces
    long long sightings = 0;
    bool nationality_or_ethnicity = false;
    bool english = true;
    bool excluded_colloquial = false;
};

/// Lexicon CSV: phrase,sightings,nationality_ethnicity,english,excluded.
/// Phrases are re-tokenized with the shared tokenizer and must be 1-4 tokens.
std::vector<LexiconEntry> load_lexicon(std::istream& in);
std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path);
std::string serialize_lexicon(const std::vector<LexiconEntry>& entries);

/// Keeps entries with sightings > min_sightings that are English, not excluded, and
/// (when require_discrimination) tagged nationality/ethnicity. May return an empty set.
std::vector<LexiconEntry> filter_lexicon(const std::vector<LexiconEntry>& entries, long long min_sightings,
                                         bool require_discrimination);

struct PhraseMatch {
    std::size_t start = 0;   // token offset
    std::size_t length = 0;  // tokens
    std::size_t phrase = 0;  // index into PhraseMatcher::phrases()
};

/// Token-level Aho-Corasick automaton over a fixed phrase set. Immutable after
/// construction; scan() is safe to call concurrently.
class PhraseMatcher {
public:
    PhraseMatcher() = default;
    /// Phrases are tokenized; duplicates (after tokenization) collapse to one pattern.
    explicit PhraseMatcher(const std::vector<std::string>& phrases);

    /// All occurrences, ordered by start token then length descending.
    std::vector<PhraseMatch> scan(const std::vector<std::string>& tokens) const;
    const std::vector<std::string>& phrases() const { return phrases_; }
    const std::vector<std::size_t>& phrase_lengths() const { return lengths_; }
    bool empty() const { return phrases_.empty(); }

private:
    struct Node {
        std::unordered_map<int, int> next;
        int fail = 0;
        std::vector<int> out;  // pattern ids ending here, including via fail links
    };
    std::unordered_map<std::string, int> vocab_;
    std::vector<Node> nodes_{1};
    std::vector<std::string> phrases_;
    std::vector<std::size_t> lengths_;
};

/// Matched lexicon phrases in `text`, in text order (longer phrase first at equal start).
std::vector<std::string> match_keywords(std::string_view text, const PhraseMatcher& matcher);
std::vector<std::string> match_keywords(std::string_view text, const std::vector<LexiconEntry>& lexicon);

PhraseMatcher make_matcher(const std::vector<LexiconEntry>& lexicon);

}  // namespace hatescope
