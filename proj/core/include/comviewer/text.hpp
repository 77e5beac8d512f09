#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace comviewer::text {

/// Index tokenizer shared by search, topics and similarity: lowercase ASCII,
/// split on anything that is not [a-z0-9], drop tokens shorter than two
/// characters and drop stopwords. Non-ASCII bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

/// Same splitting and lowercasing as tokenize() but keeps every token.
/// Used for phrase matching where stopwords carry meaning ("how do i").
std::vector<std::string> split_words(std::string_view text);

bool is_stopword(std::string_view token);

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

std::string to_lower(std::string_view s);

// UTF-8 code point helpers. Anchors use code point offsets so that the
// client and server agree regardless of how either stores strings.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
std::size_t utf8_length(std::string_view s);
/// Code point range [begin, end) of `s`. Throws std::out_of_range when the
/// range exceeds the string.
std::string utf8_substr(std::string_view s, std::size_t begin, std::size_t end);

}  // namespace comviewer::text
