#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "comviewer/corpus.hpp"

namespace comviewer {

enum class Direction { seeking, providing };
enum class SupportKind { emotional, informational };
enum class Level { high, medium, low };

std::string_view to_string(Direction d);
std::string_view to_string(SupportKind k);
std::string_view to_string(Level l);

/// Case-insensitive parsers; nullopt on unknown tokens.
std::optional<Direction> parse_direction(std::string_view s);
std::optional<SupportKind> parse_kind(std::string_view s);
std::optional<Level> parse_level(std::string_view s);

struct SupportLabel {
  Direction direction = Direction::seeking;
  SupportKind kind = SupportKind::emotional;
  Level level = Level::low;

  auto operator<=>(const SupportLabel&) const = default;
};

/// One level per support kind. Posts carry seeking levels, comments
/// providing levels.
struct LabelPair {
  Level emotional = Level::low;
  Level informational = Level::low;

  Level get(SupportKind k) const { return k == SupportKind::emotional ? emotional : informational; }
  bool operator==(const LabelPair&) const = default;
};

/// Marker phrase lists for the heuristic provider, one per
/// (direction, kind), plus the score-to-level thresholds.
struct Lexicon {
  std::map<std::pair<Direction, SupportKind>, std::vector<std::vector<std::string>>> phrases;
  double high_threshold = 0.66;
  double medium_threshold = 0.33;
  double saturation = 2.0;  // markers per window that score 1.0
  double window = 50.0;     // tokens

  /// Reads the INI-style lexicon format (see data/lexicon.txt).
  static Lexicon parse(std::string_view content);
  static Lexicon load(const std::filesystem::path& path);
  /// data/lexicon.txt from the source tree, or $COMVIEWER_DATA_DIR/lexicon.txt.
  static Lexicon load_default();
};

class LabelProvider {
 public:
  enum class ProviderKind { heuristic, imported };

  virtual ~LabelProvider() = default;
  virtual std::string name() const = 0;
  virtual ProviderKind kind() const = 0;
  virtual LabelPair label_post(const Post& post) const = 0;
  virtual LabelPair label_comment(const Comment& comment) const = 0;
};

/// Lexicon-and-threshold scorer. score = min(1, markers / (saturation *
/// max(1, tokens / window))); level = high at >= high_threshold, medium at
/// >= medium_threshold, else low.
class HeuristicProvider final : public LabelProvider {
 public:
  explicit HeuristicProvider(Lexicon lexicon);

  std::string name() const override { return "heuristic"; }
  ProviderKind kind() const override { return ProviderKind::heuristic; }
  LabelPair label_post(const Post& post) const override;
  LabelPair label_comment(const Comment& comment) const override;

  LabelPair label_text(std::string_view text, Direction direction) const;
  double score(std::string_view text, Direction direction, SupportKind kind) const;
  /// Number of non-overlapping marker occurrences (longest match wins).
  std::size_t count_markers(std::string_view text, Direction direction, SupportKind kind) const;

  const Lexicon& lexicon() const { return lexicon_; }

 private:
  Level to_level(double score) const;
  Lexicon lexicon_;
};

/// (id, direction, kind) -> level table, read from or written to the
/// `id,direction,kind,level` CSV format.
class LabelTable {
 public:
  using Key = std::tuple<std::string, Direction, SupportKind>;

  void set(std::string id, Direction d, SupportKind k, Level level);
  std::optional<Level> get(std::string_view id, Direction d, SupportKind k) const;
  std::size_t size() const { return rows_.size(); }

  /// Throws BadRequest naming the 1-based line on malformed rows.
  static LabelTable parse_csv(std::string_view content, std::string_view source = "labels");
  static LabelTable load_csv(const std::filesystem::path& path);
  std::string to_csv() const;
  void save_csv(const std::filesystem::path& path) const;

  /// Labels of a post (seeking) or comment (providing); defaults to low
  /// for missing entries.
  LabelPair post_labels(std::string_view id) const;
  LabelPair comment_labels(std::string_view id) const;

  bool operator==(const LabelTable&) const = default;

 private:
  std::map<Key, Level> rows_;
};

/// Answers from a table and falls back to another provider for ids (or
/// individual kinds) the table does not cover.
class ImportedProvider final : public LabelProvider {
 public:
  ImportedProvider(LabelTable table, std::shared_ptr<const LabelProvider> fallback);

  std::string name() const override { return "file"; }
  ProviderKind kind() const override { return ProviderKind::imported; }
  LabelPair label_post(const Post& post) const override;
  LabelPair label_comment(const Comment& comment) const override;

 private:
  LabelTable table_;
  std::shared_ptr<const LabelProvider> fallback_;
};

std::unique_ptr<LabelProvider> import_labels(const std::filesystem::path& label_file,
                                             std::shared_ptr<const LabelProvider> fallback);

/// Labels every post and comment of the corpus.
LabelTable label_corpus(const Corpus& corpus, const LabelProvider& provider);

}  // namespace comviewer
