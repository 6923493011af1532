#include "hatescope/delineate.hpp"

#include "hatescope/tokenize.hpp"

namespace hatescope {

std::string to_string(Delineation d) { return d == Delineation::self_narration ? "self_narration" : "targeted"; }

PronounCounts count_pronouns(const std::vector<std::string>& tokens, const PronounLists& lists) {
    PronounCounts c;
    for (const auto& t : tokens) {
        if (lists.first.count(t)) {
            ++c.first;
        } else if (lists.second.count(t)) {
            ++c.second;
        } else if (lists.third.count(t)) {
            ++c.third;
        }
    }
    return c;
}

PronounCounts count_pronouns(std::string_view text, const PronounLists& lists) {
    return count_pronouns(tokenize(text), lists);
}

Delineation delineate(const PronounCounts& c) {
    return c.first >= 1 && c.first > c.second + c.third ? Delineation::self_narration : Delineation::targeted;
}

Delineation delineate(std::string_view text, const PronounLists& lists) { return delineate(count_pronouns(text, lists)); }

}  // namespace hatescope
