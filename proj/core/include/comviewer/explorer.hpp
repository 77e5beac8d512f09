#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "comviewer/corpus.hpp"
#include "comviewer/labeling.hpp"
#include "comviewer/search.hpp"
#include "comviewer/topics.hpp"

namespace comviewer {

enum class NodeLevel { root, topic, post, comment };
std::string_view to_string(NodeLevel level);

/// One circle of the topic -> post -> comment hierarchy.
///
/// weight: topic = number of posts, post = number of comments, comment = 1.
struct CircleNode {
  NodeLevel level = NodeLevel::root;
  std::string ref_id;
  std::size_t weight = 0;
  std::vector<CircleNode> children;
  std::optional<LabelPair> labels;      // seeking on posts, providing on comments
  std::optional<KeywordSet> keywords;   // topics only
  std::string title;                    // posts only
  std::size_t rank = 0;                 // search rank, posts only

  const CircleNode* find_child(std::string_view ref) const;
  bool operator==(const CircleNode&) const = default;
};

/// Active histogram bars. Seeking selections constrain posts, providing
/// selections constrain comments.
///
/// Within one (direction, kind) the selected levels form a union; across
/// kinds the constraints intersect; a kind with nothing selected does not
/// constrain.
struct SupportFilter {
  std::set<SupportLabel> selections;

  SupportFilter& select(Direction d, SupportKind k, Level l) {
    selections.insert({d, k, l});
    return *this;
  }
  bool empty() const { return selections.empty(); }
  bool has_direction(Direction d) const;
  bool allows(Direction d, const LabelPair& labels) const;

  bool operator==(const SupportFilter&) const = default;
};

struct SupportHistogram {
  Direction direction = Direction::seeking;
  // counts[kind][level], kind 0 = emotional, level 0 = high.
  std::size_t counts[2][3] = {{0, 0, 0}, {0, 0, 0}};

  std::size_t count(SupportKind k, Level l) const {
    return counts[static_cast<int>(k)][static_cast<int>(l)];
  }
  std::size_t total(SupportKind k) const;
};

/// Builds root -> topics -> posts -> comments. Topics with no posts are
/// omitted. Throws BadRequest if a result has no topic assignment and
/// NotFound if a result is missing from the corpus.
CircleNode build_hierarchy(const std::vector<SearchResult>& results, const std::vector<TopicAssignment>& assignments,
                           const std::vector<KeywordSet>& keywords, const LabelTable& labels, const Corpus& corpus);

/// Pruned copy: posts failing the seeking constraints disappear (and
/// topics left empty with them), comments failing the providing constraints
/// disappear. Weights are recomputed from the surviving children.
CircleNode apply_filter(const CircleNode& node, const SupportFilter& filter);

/// Counts of visible posts (seeking) or comments (providing) below `node`.
SupportHistogram histogram(const CircleNode& node, Direction direction);

/// Packed geometry mirroring a CircleNode tree.
struct LayoutCircle {
  std::string ref_id;
  NodeLevel level = NodeLevel::root;
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
  std::vector<LayoutCircle> children;

  const LayoutCircle* find_child(std::string_view ref) const;
};

struct PackOptions {
  double min_weight = 0.5;  // w_min in radius = c * sqrt(max(weight, w_min))
  double padding = 0.03;    // fraction of the parent radius kept free
};

/// Circle-packing layout in the unit square: the root is centered at
/// (0.5, 0.5) with radius 0.5. Children are ordered by descending weight
/// then ref_id, packed along a front chain with radius proportional to
/// sqrt(max(weight, min_weight)), and scaled uniformly into their parent.
LayoutCircle pack(const CircleNode& root, const PackOptions& options = {});

/// Which stratum a zoom path addresses.
enum class ViewLevel { topic, post, comment };
std::string_view to_string(ViewLevel level);

struct ZoomView {
  ViewLevel level = ViewLevel::topic;
  std::vector<std::string> path;
  const CircleNode* node = nullptr;        // visible root
  const LayoutCircle* layout = nullptr;    // its geometry
  SupportHistogram histogram;              // seeking above comment level, providing at it
  std::vector<std::string> post_ids;       // post list scoped to the visible root, by rank
  std::uint64_t version = 0;
};

/// Per-session exploration state: the unfiltered hierarchy, the active
/// filter and its packed layout.
class Explorer {
 public:
  explicit Explorer(CircleNode hierarchy, PackOptions options = {});

  const CircleNode& hierarchy() const { return base_; }
  const CircleNode& visible() const { return visible_; }
  const LayoutCircle& layout() const { return layout_; }
  const SupportFilter& filter() const { return filter_; }
  const std::vector<std::string>& path() const { return path_; }
  /// Bumped on every filter change; zoom requests carrying an older version
  /// are stale.
  std::uint64_t version() const { return version_; }

  /// Replaces the selections of the current view level's direction
  /// (seeking above comment level, providing at it) and keeps those of the
  /// other direction. Throws BadRequest if a selection has the wrong
  /// direction. The zoom path is truncated to its longest surviving prefix.
  ZoomView set_filter(const SupportFilter& selections);

  /// Throws StaleView if `expected_version` is given and outdated or if the
  /// path does not resolve in the filtered hierarchy; BadRequest if the path
  /// is deeper than the comment level.
  ZoomView zoom(const std::vector<std::string>& path, std::optional<std::uint64_t> expected_version = std::nullopt);

  ZoomView current() const;

 private:
  ZoomView view_for(const std::vector<std::string>& path) const;

  CircleNode base_;
  CircleNode visible_;
  LayoutCircle layout_;
  SupportFilter filter_;
  PackOptions options_;
  std::vector<std::string> path_;
  std::uint64_t version_ = 0;
};

}  // namespace comviewer
