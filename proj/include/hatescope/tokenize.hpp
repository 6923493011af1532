#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hatescope {

/// Token that replaces every @mention.
inline constexpr std::string_view kMentionToken = "@user";

/// Shared tokenizer used by keyword matching, featurization, pronoun counting and
/// lexical scoring:
///   - ASCII case-fold (non-ASCII bytes pass through unchanged)
///   - split on Unicode whitespace
///   - strip leading/trailing punctuation
///   - split at apostrophes ("they're" -> "they", "re")
///   - #hashtags kept whole, @mentions replaced by kMentionToken
std::vector<std::string> tokenize(std::string_view text);

}  // namespace hatescope
