#include "hatescope/tokenize.hpp"

#include <cctype>

namespace hatescope {

namespace {

// Length in bytes of a Unicode whitespace sequence starting at s[i], 0 if none.
std::size_t whitespace_len(std::string_view s, std::size_t i) {
    auto b = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char c = b(i);
    if (c < 0x80) return std::isspace(c) ? 1 : 0;
    std::size_t left = s.size() - i;
    if (c == 0xC2 && left >= 2 && (b(i + 1) == 0x85 || b(i + 1) == 0xA0)) return 2;
    if (left < 3) return 0;
    if (c == 0xE1 && b(i + 1) == 0x9A && b(i + 2) == 0x80) return 3;  // U+1680
    if (c == 0xE2 && b(i + 1) == 0x80) {
        unsigned char t = b(i + 2);
        if ((t >= 0x80 && t <= 0x8A) || t == 0xA8 || t == 0xA9 || t == 0xAF) return 3;
    }
    if (c == 0xE2 && b(i + 1) == 0x81 && b(i + 2) == 0x9F) return 3;  // U+205F
    if (c == 0xE3 && b(i + 1) == 0x80 && b(i + 2) == 0x80) return 3;  // U+3000
    return 0;
}

// Typographic quotes and ellipsis, treated as punctuation.
bool unicode_punct_at(std::string_view s, std::size_t i) {
    if (i + 3 > s.size()) return false;
    auto b0 = static_cast<unsigned char>(s[i]);
    auto b1 = static_cast<unsigned char>(s[i + 1]);
    auto b2 = static_cast<unsigned char>(s[i + 2]);
    return b0 == 0xE2 && b1 == 0x80 && (b2 == 0x98 || b2 == 0x99 || b2 == 0x9C || b2 == 0x9D || b2 == 0xA6);
}

bool unicode_punct_ending_at(std::string_view s, std::size_t end) {
    return end >= 3 && unicode_punct_at(s, end - 3);
}

bool ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string_view strip_trailing(std::string_view w) {
    while (!w.empty()) {
        if (ascii_punct(w.back())) {
            w.remove_suffix(1);
        } else if (unicode_punct_ending_at(w, w.size())) {
            w.remove_suffix(3);
        } else {
            break;
        }
    }
    return w;
}

std::string_view strip_leading(std::string_view w, bool keep_markers) {
    while (!w.empty()) {
        if (keep_markers && (w[0] == '#' || w[0] == '@')) break;
        if (ascii_punct(w[0])) {
            w.remove_prefix(1);
        } else if (unicode_punct_at(w, 0)) {
            w.remove_prefix(3);
        } else {
            break;
        }
    }
    return w;
}

// Apostrophe (ASCII or U+2019) length at w[i], 0 if none.
std::size_t apostrophe_len(std::string_view w, std::size_t i) {
    if (w[i] == '\'') return 1;
    if (i + 3 <= w.size() && static_cast<unsigned char>(w[i]) == 0xE2 && static_cast<unsigned char>(w[i + 1]) == 0x80 &&
        static_cast<unsigned char>(w[i + 2]) == 0x99)
        return 3;
    return 0;
}

void emit_word(std::string_view raw, std::vector<std::string>& out) {
    std::string_view w = strip_trailing(strip_leading(raw, true));
    if (w.empty()) return;
    if (w[0] == '@') {
        if (!strip_leading(w, false).empty()) out.emplace_back(kMentionToken);
        return;
    }
    if (w[0] == '#') {
        if (!strip_leading(w, false).empty()) out.emplace_back(w);
        return;
    }
    std::size_t start = 0;
    for (std::size_t i = 0; i <= w.size();) {
        std::size_t alen = i < w.size() ? apostrophe_len(w, i) : 0;
        if (i == w.size() || alen) {
            std::string_view part = strip_trailing(strip_leading(w.substr(start, i - start), false));
            if (!part.empty()) out.emplace_back(part);
            if (i == w.size()) break;
            i += alen;
            start = i;
        } else {
            ++i;
        }
    }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::string lowered(text);
    for (char& c : lowered) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    std::string_view s = lowered;
    std::vector<std::string> tokens;
    std::size_t start = 0, i = 0;
    while (i < s.size()) {
        std::size_t ws = whitespace_len(s, i);
        if (ws) {
            if (i > start) emit_word(s.substr(start, i - start), tokens);
            i += ws;
            start = i;
        } else {
            ++i;
        }
    }
    if (start < s.size()) emit_word(s.substr(start), tokens);
    return tokens;
}

}  // namespace hatescope
