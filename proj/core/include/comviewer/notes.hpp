#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace comviewer {

/// Immutable reference to a span of a post or comment body. Offsets are in
/// Unicode code points, half-open.
struct Anchor {
  std::string target;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string exact_text;

  bool operator==(const Anchor&) const = default;
};

struct Highlight {
  std::string id;
  Anchor anchor;
  std::string color;
  std::uint64_t created_at = 0;  // session-local logical clock
  std::optional<std::string> edited_text;

  /// Text shown in the collection: the edit if any, else the span.
  const std::string& display_text() const { return edited_text ? *edited_text : anchor.exact_text; }
  bool operator==(const Highlight&) const = default;
};

struct Folder {
  std::string color;
  std::vector<std::string> entries;  // highlight ids by creation time
};

/// Resolves a post or comment id to its cleaned body; nullopt if unknown.
using BodyLookup = std::function<std::optional<std::string>(std::string_view target)>;

class Palette {
 public:
  static constexpr std::size_t kMaxColors = 8;

  Palette();  // yellow, green, red
  /// Throws std::invalid_argument for empty, duplicate or more than 8 colors.
  explicit Palette(std::vector<std::string> colors);

  bool contains(std::string_view color) const;
  const std::vector<std::string>& colors() const { return colors_; }

 private:
  std::vector<std::string> colors_;
};

/// Per-session highlights and color folders.
///
/// Same-color highlights on one target are kept pairwise disjoint: adding
/// or recoloring a span that overlaps or touches a same-color span merges
/// them into one spanning highlight that keeps the oldest id.
class NoteBook {
 public:
  explicit NoteBook(Palette palette = {});

  /// Validates the anchor against the body (BadRequest with an
  /// expected-vs-found detail on mismatch, NotFound for unknown targets).
  const Highlight& add_highlight(const Anchor& anchor, const std::string& color, const BodyLookup& bodies);
  /// Moves a highlight to another folder; merges with same-color overlaps
  /// in the destination. Returns the surviving highlight.
  const Highlight& recolor(const std::string& id, const std::string& color, const BodyLookup& bodies);
  void clear(const std::string& id);
  const Anchor& navigate(const std::string& id) const;
  const Highlight& edit_entry(const std::string& id, std::string new_text);

  const Highlight& get(const std::string& id) const;
  Folder folder(const std::string& color) const;
  std::vector<Folder> folders() const;
  /// Highlights in creation order.
  std::vector<const Highlight*> highlights() const;
  std::vector<const Highlight*> highlights_on(std::string_view target) const;
  std::size_t size() const { return highlights_.size(); }
  const Palette& palette() const { return palette_; }

  /// Restores state verbatim (session import). Counters continue after the
  /// largest restored values.
  void restore(std::vector<Highlight> highlights);

 private:
  Highlight& mutable_get(const std::string& id);
  void check_color(const std::string& color) const;
  /// Folds every same-color highlight on `seed`'s target that overlaps or
  /// touches it into the oldest of the group. Returns the survivor id.
  std::string merge_from(const std::string& seed_id, const BodyLookup& bodies);

  Palette palette_;
  std::map<std::string, Highlight> highlights_;
  std::uint64_t clock_ = 0;
  std::uint64_t next_id_ = 1;
};

/// Checks 0 <= start < end <= len(body) and body[start:end] == exact_text.
/// Throws BadRequest otherwise.
void validate_anchor(const Anchor& anchor, std::string_view body);

}  // namespace comviewer
