#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "comviewer/corpus.hpp"

namespace comviewer {

struct Posting {
  std::uint32_t doc = 0;  // index into InvertedIndex::doc_ids(), which is sorted by post id
  std::uint32_t tf = 0;   // >= 1

  bool operator==(const Posting&) const = default;
};

struct PostingList {
  std::string term;
  std::vector<Posting> entries;  // sorted by doc

  bool operator==(const PostingList&) const = default;
};

struct SearchConfig {
  std::size_t n_top = 150;
};

struct SearchResult {
  std::string post_id;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

enum class SearchStatus { ok, empty_query };

struct SearchResponse {
  SearchStatus status = SearchStatus::ok;
  std::vector<SearchResult> results;
};

/// Immutable term -> postings map over post title + body.
///
/// Scoring: score(d) = sum over distinct query terms t present in d of
/// (1 + ln tf(t,d)) * ln(N / df(t)). Ties go to the smaller post id.
class InvertedIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  InvertedIndex() = default;

  static InvertedIndex build(const Corpus& corpus);
  /// Builds from (id, text) pairs; ids need not be sorted but must be unique.
  static InvertedIndex build(const std::vector<std::pair<std::string, std::string>>& docs);

  SearchResponse search(std::string_view query, const SearchConfig& config = {}) const;

  std::size_t doc_count() const { return doc_ids_.size(); }
  std::size_t term_count() const { return postings_.size(); }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }

  /// nullptr when the term is absent.
  const PostingList* postings(std::string_view term) const;
  double idf(std::string_view term) const;

  /// Binary serialization; layout documented in docs/index-format.md.
  std::string serialize() const;
  static InvertedIndex deserialize(std::string_view bytes);

  void save(const std::filesystem::path& index_dir) const;
  static InvertedIndex load(const std::filesystem::path& index_dir);

  bool operator==(const InvertedIndex&) const = default;

 private:
  std::vector<std::string> doc_ids_;
  std::map<std::string, PostingList, std::less<>> postings_;
};

}  // namespace comviewer
