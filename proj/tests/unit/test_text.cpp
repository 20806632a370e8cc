#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <gtest/gtest.h>

using namespace hmrag;

TEST(Text, LowerAndTrim) {
    EXPECT_EQ(to_lower("MiXeD 123"), "mixed 123");
    EXPECT_EQ(trim("  \t a b \n"), "a b");
    EXPECT_EQ(trim("   "), "");
}

TEST(Text, SplitWhitespaceDropsEmpty) {
    EXPECT_EQ(split_whitespace("  a\tb\n\nc  "), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(split_whitespace(" \n ").empty());
}

TEST(Text, WordTokensSplitOnPunctuationAndKeepUtf8) {
    EXPECT_EQ(word_tokens("Granite, basalt; (Obsidian)!"),
              (std::vector<std::string>{"granite", "basalt", "obsidian"}));
    EXPECT_EQ(word_tokens("caf\xc3\xa9 au lait"), (std::vector<std::string>{"caf\xc3\xa9", "au", "lait"}));
}

TEST(Text, ContentWordsDropStopwordsAndDuplicates) {
    EXPECT_EQ(content_words("What is the hardness of the granite and granite?"),
              (std::vector<std::string>{"hardness", "granite"}));
}

TEST(Text, StartsWithIcase) {
    EXPECT_TRUE(starts_with_icase("Hello world", "hELLO"));
    EXPECT_FALSE(starts_with_icase("He", "Hello"));
}

TEST(Text, Fnv1aKnownVectors) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a64("b", fnv1a64("a")), fnv1a64("ab"));
    EXPECT_EQ(to_hex(0xabcULL), "0000000000000abc");
}

TEST(Text, ReadFileMissingThrows) {
    EXPECT_THROW(read_file("/nonexistent/definitely/missing.txt"), InvalidArgument);
}
