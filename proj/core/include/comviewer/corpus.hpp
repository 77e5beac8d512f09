#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace comviewer {

/// One line of a Pushshift-style dump before cleaning.
struct RawRecord {
  std::string id;
  std::optional<std::string> parent_id;  // present iff the record is a comment
  std::optional<std::string> title;
  std::string body;
  std::int64_t created_utc = 0;

  bool is_comment() const { return parent_id.has_value(); }
};

struct Comment {
  std::string id;
  std::string post_id;
  std::string body;
  std::int64_t created_utc = 0;
  int depth = 0;  // 0 = reply to the post itself

  bool operator==(const Comment&) const = default;
};

struct Post {
  std::string id;
  std::string title;
  std::string body;
  std::int64_t created_utc = 0;
  std::vector<std::string> comment_ids;  // thread order, depth-first

  /// Title and body joined by a blank line; this is what search and
  /// similarity see.
  std::string full_text() const;

  bool operator==(const Post&) const = default;
};

struct CorpusStats {
  std::uint64_t n_raw = 0;
  std::uint64_t n_posts = 0;
  std::uint64_t n_comments = 0;
  std::uint64_t n_dropped_tombstone_id = 0;
  std::uint64_t n_dropped_tombstone_body = 0;
  std::uint64_t n_dropped_orphan = 0;  // parent chain does not reach a kept post
  std::uint64_t n_malformed = 0;       // unparseable line, missing fields, duplicate id

  bool operator==(const CorpusStats&) const = default;
};

/// True for the two Reddit tombstone markers.
bool is_tombstone(std::string_view s);

/// Parses one dump line. Returns nullopt for malformed input.
std::optional<RawRecord> parse_record(std::string_view line);

/// Immutable post/comment store. Posts are kept sorted by id.
class Corpus {
 public:
  Corpus() = default;

  /// Applies the cleaning rules to raw records (in dump order).
  static Corpus from_records(const std::vector<RawRecord>& records, CorpusStats* stats = nullptr);

  /// Reads a newline-delimited dump. Throws std::runtime_error naming the
  /// path when the file cannot be opened.
  static Corpus from_dump(const std::filesystem::path& dump, CorpusStats* stats = nullptr);

  /// Loads a store directory written by save().
  static Corpus load(const std::filesystem::path& store_dir);

  /// Writes `corpus.kv` and `stats.json` into `store_dir`, replacing any
  /// previous contents of those files.
  void save(const std::filesystem::path& store_dir) const;

  const std::vector<Post>& posts() const { return posts_; }
  std::size_t post_count() const { return posts_.size(); }
  std::size_t comment_count() const { return comments_.size(); }
  const CorpusStats& stats() const { return stats_; }

  const Post* find_post(std::string_view id) const;
  const Comment* find_comment(std::string_view id) const;

  /// Throws NotFound for unknown ids.
  const Post& post(std::string_view id) const;
  const Comment& comment(std::string_view id) const;
  std::vector<const Comment*> comments_of(const Post& post) const;

  /// Body text of a post or comment, for anchoring.
  const std::string* body_of(std::string_view target_id) const;

  /// Comments in post order then thread order.
  std::vector<const Comment*> all_comments() const;

 private:
  void reindex();

  std::vector<Post> posts_;
  std::unordered_map<std::string, Comment> comments_;
  std::unordered_map<std::string, std::size_t> post_index_;
  CorpusStats stats_;
};

/// Result of get_post: the post plus its comments in stored order.
struct PostWithComments {
  Post post;
  std::vector<Comment> comments;
};

PostWithComments get_post(const Corpus& corpus, std::string_view id);

/// Reads the corpus from `dump`, writes it to `store_dir` and returns the
/// tallies.
CorpusStats ingest(const std::filesystem::path& dump, const std::filesystem::path& store_dir);

}  // namespace comviewer
