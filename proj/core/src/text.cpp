#include "comviewer/text.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

#include "comviewer/error.hpp"

namespace comviewer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_request: return "bad_request";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::upstream_llm: return "upstream_llm";
    case ErrorCode::stale_view: return "stale_view";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

}  // namespace comviewer

namespace comviewer::text {
namespace {

// English stopwords, sorted for binary search. Single-letter words are
// omitted since the tokenizer drops them anyway.
constexpr std::string_view kStopwords[] = {
    "about",   "above",   "after",   "again",   "against", "all",     "am",
    "an",      "and",     "any",     "are",     "aren",    "as",      "at",
    "be",      "because", "been",    "before",  "being",   "below",   "between",
    "both",    "but",     "by",      "can",     "couldn",  "did",     "didn",
    "do",      "does",    "doesn",   "doing",   "don",     "down",    "during",
    "each",    "few",     "for",     "from",    "further", "had",     "hadn",
    "has",     "hasn",    "have",    "haven",   "having",  "he",      "her",
    "here",    "hers",    "herself", "him",     "himself", "his",     "how",
    "if",      "in",      "into",    "is",      "isn",     "it",      "its",
    "itself",  "just",    "ll",      "me",      "more",    "most",    "mustn",
    "my",      "myself",  "no",      "nor",     "not",     "now",     "of",
    "off",     "on",      "once",    "only",    "or",      "other",   "our",
    "ours",    "ourselves", "out",   "over",    "own",     "re",      "same",
    "shan",    "she",     "should",  "shouldn", "so",      "some",    "such",
    "than",    "that",    "the",     "their",   "theirs",  "them",    "themselves",
    "then",    "there",   "these",   "they",    "this",    "those",   "through",
    "to",      "too",     "under",   "until",   "up",      "ve",      "very",
    "was",     "wasn",    "we",      "were",    "weren",   "what",    "when",
    "where",   "which",   "while",   "who",     "whom",    "why",     "will",
    "with",    "won",     "would",   "wouldn",  "you",     "your",    "yours",
    "yourself", "yourselves", "also", "could",  "get",     "got",     "im",
    "ive",     "like",    "really",  "much",    "even",    "still",   "going",
    "one",     "thing",   "things"};

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

const std::vector<std::string_view>& sorted_stopwords() {
  static const std::vector<std::string_view> words = [] {
    std::vector<std::string_view> v(std::begin(kStopwords), std::end(kStopwords));
    std::sort(v.begin(), v.end());
    return v;
  }();
  return words;
}

}  // namespace

bool is_stopword(std::string_view token) {
  const auto& words = sorted_stopwords();
  return std::binary_search(words.begin(), words.end(), token);
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  auto words = split_words(text);
  std::erase_if(words, [](const std::string& w) { return w.size() < 2 || is_stopword(w); });
  return words;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(static_cast<unsigned char>(c));
  return out;
}

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c >> 4) == 0xE) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      cp = c & 0x07;
      len = 4;
    } else {
      // Stray continuation or invalid lead byte: keep it as U+FFFD.
      out.push_back(U'�');
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(U'�');
      break;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::size_t utf8_length(std::string_view s) { return utf8_decode(s).size(); }

std::string utf8_substr(std::string_view s, std::size_t begin, std::size_t end) {
  auto cps = utf8_decode(s);
  if (begin > end || end > cps.size()) throw std::out_of_range("utf8_substr: range outside text");
  return utf8_encode(std::u32string_view(cps).substr(begin, end - begin));
}

}  // namespace comviewer::text
