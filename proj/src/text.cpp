#include "hmrag/text.hpp"

#include "hmrag/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace hmrag {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_separator(char c) {
    auto u = static_cast<unsigned char>(c);
    return u < 0x80 && (std::isspace(u) || std::ispunct(u));
}

// Common English function words; enough to strip query boilerplate.
const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a",       "about",  "above", "after",  "again", "against", "all",    "am",
        "an",      "and",    "any",   "are",    "as",    "at",      "be",     "because",
        "been",    "before", "being", "below",  "between", "both",  "but",    "by",
        "can",     "could",  "did",   "do",     "does",  "doing",   "down",   "during",
        "each",    "few",    "for",   "from",   "further", "had",   "has",    "have",
        "having",  "he",     "her",   "here",   "hers",  "herself", "him",    "himself",
        "his",     "how",    "i",     "if",     "in",    "into",    "is",     "it",
        "its",     "itself", "just",  "me",     "more",  "most",    "my",     "myself",
        "no",      "nor",    "not",   "now",    "of",    "off",     "on",     "once",
        "only",    "or",     "other", "our",    "ours",  "out",     "over",   "own",
        "same",    "she",    "should", "so",    "some",  "such",    "than",   "that",
        "the",     "their",  "theirs", "them",  "then",  "there",   "these",  "they",
        "this",    "those",  "through", "to",   "too",   "under",   "until",  "up",
        "very",    "was",    "we",    "were",   "what",  "when",    "where",  "which",
        "while",   "who",    "whom",  "why",    "will",  "with",    "would",  "you",
        "your",    "yours",  "yourself", "s",   "t",     "don",     "shall",  "may",
        "might",   "must",   "also",  "many",   "much",
    };
    return words;
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string current;
    for (char c : s) {
        if (is_separator(c)) {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
        } else {
            auto u = static_cast<unsigned char>(c);
            current.push_back(static_cast<char>(u < 0x80 ? std::tolower(u) : u));
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

bool is_stopword(std::string_view lowercase_word) {
    return stopwords().count(lowercase_word) > 0;
}

std::vector<std::string> content_words(std::string_view s) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (auto& tok : word_tokens(s)) {
        if (is_stopword(tok)) continue;
        if (seen.insert(tok).second) out.push_back(std::move(tok));
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value) {
    static constexpr std::array<char, 16> digits = {'0', '1', '2', '3', '4', '5', '6', '7',
                                                    '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hmrag
