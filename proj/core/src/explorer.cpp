#include "comviewer/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "comviewer/error.hpp"
#include "comviewer/layout.hpp"

namespace comviewer {

std::string_view to_string(NodeLevel level) {
  switch (level) {
    case NodeLevel::root: return "root";
    case NodeLevel::topic: return "topic";
    case NodeLevel::post: return "post";
    case NodeLevel::comment: return "comment";
  }
  return "root";
}

std::string_view to_string(ViewLevel level) {
  switch (level) {
    case ViewLevel::topic: return "topic";
    case ViewLevel::post: return "post";
    case ViewLevel::comment: return "comment";
  }
  return "topic";
}

const CircleNode* CircleNode::find_child(std::string_view ref) const {
  for (const auto& c : children)
    if (c.ref_id == ref) return &c;
  return nullptr;
}

const LayoutCircle* LayoutCircle::find_child(std::string_view ref) const {
  for (const auto& c : children)
    if (c.ref_id == ref) return &c;
  return nullptr;
}

// --- filter ------------------------------------------------------------------

bool SupportFilter::has_direction(Direction d) const {
  return std::any_of(selections.begin(), selections.end(), [d](const SupportLabel& s) { return s.direction == d; });
}

bool SupportFilter::allows(Direction d, const LabelPair& labels) const {
  for (auto kind : {SupportKind::emotional, SupportKind::informational}) {
    bool constrained = false;
    bool hit = false;
    for (const auto& s : selections) {
      if (s.direction != d || s.kind != kind) continue;
      constrained = true;
      if (s.level == labels.get(kind)) hit = true;
    }
    if (constrained && !hit) return false;
  }
  return true;
}

std::size_t SupportHistogram::total(SupportKind k) const {
  const auto& row = counts[static_cast<int>(k)];
  return row[0] + row[1] + row[2];
}

CircleNode apply_filter(const CircleNode& node, const SupportFilter& filter) {
  CircleNode out = node;
  out.children.clear();
  for (const auto& child : node.children) {
    if (child.level == NodeLevel::post && child.labels && !filter.allows(Direction::seeking, *child.labels)) continue;
    if (child.level == NodeLevel::comment && child.labels && !filter.allows(Direction::providing, *child.labels))
      continue;
    CircleNode kept = apply_filter(child, filter);
    if (kept.level == NodeLevel::topic && kept.children.empty()) continue;
    out.children.push_back(std::move(kept));
  }
  if (out.level == NodeLevel::topic || out.level == NodeLevel::post) out.weight = out.children.size();
  if (out.level == NodeLevel::root) out.weight = out.children.size();
  return out;
}

SupportHistogram histogram(const CircleNode& node, Direction direction) {
  SupportHistogram h;
  h.direction = direction;
  const NodeLevel target = direction == Direction::seeking ? NodeLevel::post : NodeLevel::comment;
  auto visit = [&](auto&& self, const CircleNode& n) -> void {
    if (n.level == target) {
      if (n.labels) {
        ++h.counts[0][static_cast<int>(n.labels->emotional)];
        ++h.counts[1][static_cast<int>(n.labels->informational)];
      }
      return;
    }
    for (const auto& c : n.children) self(self, c);
  };
  visit(visit, node);
  return h;
}

// --- hierarchy -----------------------------------------------------------------

CircleNode build_hierarchy(const std::vector<SearchResult>& results, const std::vector<TopicAssignment>& assignments,
                           const std::vector<KeywordSet>& keywords, const LabelTable& labels, const Corpus& corpus) {
  std::map<std::string, std::size_t, std::less<>> topic_of;
  for (const auto& a : assignments) topic_of[a.post_id] = a.topic_id;

  std::map<std::size_t, CircleNode> topics;
  for (const auto& r : results) {
    auto it = topic_of.find(r.post_id);
    if (it == topic_of.end()) throw BadRequest("search result " + r.post_id + " has no topic assignment");
    const Post& post = corpus.post(r.post_id);

    CircleNode pn;
    pn.level = NodeLevel::post;
    pn.ref_id = post.id;
    pn.title = post.title;
    pn.rank = r.rank;
    pn.labels = labels.post_labels(post.id);
    for (const auto* c : corpus.comments_of(post)) {
      CircleNode cn;
      cn.level = NodeLevel::comment;
      cn.ref_id = c->id;
      cn.weight = 1;
      cn.labels = labels.comment_labels(c->id);
      pn.children.push_back(std::move(cn));
    }
    pn.weight = pn.children.size();

    auto& topic = topics[it->second];
    if (topic.ref_id.empty()) {
      topic.level = NodeLevel::topic;
      topic.ref_id = "topic-" + std::to_string(it->second);
      for (const auto& ks : keywords)
        if (ks.topic_id == it->second) topic.keywords = ks;
    }
    topic.children.push_back(std::move(pn));
  }

  CircleNode root;
  root.level = NodeLevel::root;
  root.ref_id = "root";
  for (auto& [_, topic] : topics) {
    topic.weight = topic.children.size();
    root.children.push_back(std::move(topic));
  }
  root.weight = root.children.size();
  return root;
}

// --- packing -------------------------------------------------------------------

namespace {

void pack_into(const CircleNode& node, LayoutCircle& out, const PackOptions& options) {
  if (node.children.empty()) return;

  std::vector<const CircleNode*> order;
  for (const auto& c : node.children) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const CircleNode* a, const CircleNode* b) {
    if (a->weight != b->weight) return a->weight > b->weight;
    return a->ref_id < b->ref_id;
  });

  std::vector<layout::Circle> circles(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    circles[i].r = std::sqrt(std::max(static_cast<double>(order[i]->weight), options.min_weight));
  layout::pack_siblings(circles);

  const auto e = layout::enclose(circles);
  const double extent = layout::containing_radius(circles, e.x, e.y);
  const double scale = out.r * (1.0 - options.padding) / extent;

  out.children.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& lc = out.children[i];
    lc.ref_id = order[i]->ref_id;
    lc.level = order[i]->level;
    lc.x = out.x + (circles[i].x - e.x) * scale;
    lc.y = out.y + (circles[i].y - e.y) * scale;
    lc.r = circles[i].r * scale;
    pack_into(*order[i], lc, options);
  }
}

}  // namespace

LayoutCircle pack(const CircleNode& root, const PackOptions& options) {
  LayoutCircle out;
  out.ref_id = root.ref_id;
  out.level = root.level;
  out.x = 0.5;
  out.y = 0.5;
  out.r = 0.5;
  pack_into(root, out, options);
  return out;
}

// --- Explorer --------------------------------------------------------------------

Explorer::Explorer(CircleNode hierarchy, PackOptions options)
    : base_(std::move(hierarchy)), visible_(base_), options_(options) {
  layout_ = pack(visible_, options_);
}

namespace {

ViewLevel level_for_depth(std::size_t depth) {
  switch (depth) {
    case 0: return ViewLevel::topic;
    case 1: return ViewLevel::post;
    default: return ViewLevel::comment;
  }
}

void collect_posts(const CircleNode& n, std::vector<const CircleNode*>& out) {
  if (n.level == NodeLevel::post) {
    out.push_back(&n);
    return;
  }
  for (const auto& c : n.children) collect_posts(c, out);
}

}  // namespace

ZoomView Explorer::view_for(const std::vector<std::string>& path) const {
  if (path.size() > 2) throw BadRequest("zoom path deeper than the comment level");
  const CircleNode* node = &visible_;
  const LayoutCircle* geo = &layout_;
  for (const auto& ref : path) {
    node = node->find_child(ref);
    geo = geo ? geo->find_child(ref) : nullptr;
    if (!node || !geo) throw StaleView("zoom path no longer resolves; refresh the view", ref);
  }
  ZoomView v;
  v.level = level_for_depth(path.size());
  v.path = path;
  v.node = node;
  v.layout = geo;
  v.histogram = histogram(*node, v.level == ViewLevel::comment ? Direction::providing : Direction::seeking);
  std::vector<const CircleNode*> posts;
  if (node->level == NodeLevel::post) posts.push_back(node);
  else collect_posts(*node, posts);
  std::sort(posts.begin(), posts.end(), [](auto* a, auto* b) { return std::tie(a->rank, a->ref_id) < std::tie(b->rank, b->ref_id); });
  for (const auto* p : posts) v.post_ids.push_back(p->ref_id);
  v.version = version_;
  return v;
}

ZoomView Explorer::current() const { return view_for(path_); }

ZoomView Explorer::zoom(const std::vector<std::string>& path, std::optional<std::uint64_t> expected_version) {
  if (expected_version && *expected_version != version_)
    throw StaleView("view changed since version " + std::to_string(*expected_version) + "; refresh the view");
  auto v = view_for(path);
  path_ = path;
  return v;
}

ZoomView Explorer::set_filter(const SupportFilter& selections) {
  const Direction dir = level_for_depth(path_.size()) == ViewLevel::comment ? Direction::providing : Direction::seeking;
  for (const auto& s : selections.selections) {
    if (s.direction != dir)
      throw BadRequest("filter direction '" + std::string(to_string(s.direction)) + "' does not match the " +
                       std::string(to_string(level_for_depth(path_.size()))) + " level");
  }
  SupportFilter next;
  for (const auto& s : filter_.selections)
    if (s.direction != dir) next.selections.insert(s);
  next.selections.insert(selections.selections.begin(), selections.selections.end());

  filter_ = std::move(next);
  visible_ = apply_filter(base_, filter_);
  layout_ = pack(visible_, options_);
  ++version_;

  std::vector<std::string> kept;
  const CircleNode* node = &visible_;
  for (const auto& ref : path_) {
    node = node->find_child(ref);
    if (!node) break;
    kept.push_back(ref);
  }
  path_ = std::move(kept);
  return current();
}

}  // namespace comviewer
