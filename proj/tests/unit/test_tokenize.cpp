#include <doctest.h>

#include "hatescope/tokenize.hpp"

using hatescope::tokenize;
using V = std::vector<std::string>;

TEST_SUITE("tokenize") {
    TEST_CASE("case folding and edge punctuation") {
        CHECK(tokenize("You are WHITE TRASH!") == V{"you", "are", "white", "trash"});
        CHECK(tokenize("(quoted), \"words\"...") == V{"quoted", "words"});
        CHECK(tokenize("so-called") == V{"so-called"});
    }

    TEST_CASE("contractions split at the apostrophe") {
        CHECK(tokenize("they're here") == V{"they", "re", "here"});
        CHECK(tokenize("it\xE2\x80\x99s fine") == V{"it", "s", "fine"});
        CHECK(tokenize("'quoted'") == V{"quoted"});
    }

    TEST_CASE("hashtags stay whole, mentions become a placeholder") {
        CHECK(tokenize("#BanThem now") == V{"#banthem", "now"});
        CHECK(tokenize("@SomeUser, hi") == V{"@user", "hi"});
        CHECK(tokenize("@ # !!") == V{});
    }

    TEST_CASE("unicode whitespace separates tokens") {
        CHECK(tokenize("a\xC2\xA0" "b\xE3\x80\x80" "c\n\td") == V{"a", "b", "c", "d"});
        CHECK(tokenize("") == V{});
        CHECK(tokenize("   ") == V{});
    }

    TEST_CASE("non-ASCII bytes pass through unchanged") {
        CHECK(tokenize("Caf\xC3\x89 OK") == V{"caf\xC3\x89", "ok"});
    }

    TEST_CASE("whitespace runs do not matter") {
        CHECK(tokenize("a   b\t\t c") == tokenize("a b c"));
    }
}
