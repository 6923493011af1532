#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace hatescope {

struct PronounCounts {
    int first = 0;
    int second = 0;
    int third = 0;
};

/// Pronoun lists, matched case-insensitively against shared-tokenizer output.
struct PronounLists {
    std::unordered_set<std::string> first{"i", "me", "mine", "my", "we", "us", "our", "ours"};
    std::unordered_set<std::string> second{"you", "your", "yours"};
    std::unordered_set<std::string> third{"he",   "him",  "his",    "she", "her", "hers",
                                          "they", "them", "their", "theirs", "it",  "its"};
};

enum class Delineation { self_narration, targeted };

std::string to_string(Delineation d);

PronounCounts count_pronouns(const std::vector<std::string>& tokens, const PronounLists& lists = {});
PronounCounts count_pronouns(std::string_view text, const PronounLists& lists = {});

/// Self-narration iff first >= 1 and first > second + third (absolute majority); otherwise targeted.
Delineation delineate(const PronounCounts& counts);
Delineation delineate(std::string_view text, const PronounLists& lists = {});

}  // namespace hatescope
