#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Splits on ASCII whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);

/// Case-folded word tokens: splits on whitespace and ASCII punctuation.
/// Bytes >= 0x80 stay inside tokens so UTF-8 words survive intact.
std::vector<std::string> word_tokens(std::string_view s);

/// word_tokens minus English stopwords, deduplicated, first-seen order.
std::vector<std::string> content_words(std::string_view s);

bool is_stopword(std::string_view lowercase_word);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_icase(std::string_view s, std::string_view prefix);

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// 64-bit FNV-1a. Chaining is allowed by passing a previous result as seed.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset);

std::string to_hex(std::uint64_t value);

/// Reads a whole file; throws InvalidArgument when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace hmrag
