#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "comviewer/error.hpp"
#include "comviewer/explorer.hpp"
#include "oracles.hpp"

using namespace comviewer;

namespace {

const std::vector<Level> kLevels{Level::high, Level::medium, Level::low};

CircleNode comment(std::string id, Level emo, Level info) {
  CircleNode c;
  c.level = NodeLevel::comment;
  c.ref_id = std::move(id);
  c.weight = 1;
  c.labels = LabelPair{emo, info};
  return c;
}

CircleNode post(std::string id, std::size_t rank, Level emo, Level info, std::vector<CircleNode> comments) {
  CircleNode p;
  p.level = NodeLevel::post;
  p.ref_id = std::move(id);
  p.rank = rank;
  p.title = "t" + p.ref_id;
  p.labels = LabelPair{emo, info};
  p.children = std::move(comments);
  p.weight = p.children.size();
  return p;
}

CircleNode topic(std::string id, std::vector<CircleNode> posts) {
  CircleNode t;
  t.level = NodeLevel::topic;
  t.ref_id = std::move(id);
  t.children = std::move(posts);
  t.weight = t.children.size();
  return t;
}

CircleNode root_of(std::vector<CircleNode> topics) {
  CircleNode r;
  r.ref_id = "root";
  r.children = std::move(topics);
  r.weight = r.children.size();
  return r;
}

/// Random tree with random labels; posts ranked 1..n.
CircleNode random_tree(std::mt19937_64& rng, std::size_t max_topics = 5, std::size_t max_posts = 8,
                       std::size_t max_comments = 6) {
  std::vector<CircleNode> topics;
  std::size_t rank = 1, cid = 0;
  const std::size_t nt = 1 + rng() % max_topics;
  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<CircleNode> posts;
    for (std::size_t p = 0, np = 1 + rng() % max_posts; p < np; ++p) {
      std::vector<CircleNode> comments;
      for (std::size_t c = 0, nc = rng() % (max_comments + 1); c < nc; ++c)
        comments.push_back(comment("c" + std::to_string(cid++), kLevels[rng() % 3], kLevels[rng() % 3]));
      posts.push_back(post("p" + std::to_string(rank), rank, kLevels[rng() % 3], kLevels[rng() % 3], std::move(comments)));
      ++rank;
    }
    topics.push_back(topic(std::to_string(t), std::move(posts)));
  }
  return root_of(std::move(topics));
}

std::set<std::string> ids_at(const CircleNode& n, NodeLevel level) {
  std::set<std::string> out;
  std::function<void(const CircleNode&)> walk = [&](const CircleNode& x) {
    if (x.level == level) out.insert(x.ref_id);
    for (const auto& c : x.children) walk(c);
  };
  walk(n);
  return out;
}

SupportFilter random_filter(std::mt19937_64& rng, Direction d) {
  SupportFilter f;
  for (auto k : {SupportKind::emotional, SupportKind::informational})
    for (auto l : kLevels)
      if (rng() % 3 == 0) f.select(d, k, l);
  return f;
}

/// Reference semantics: per kind, the selected levels (or all when none).
bool reference_allows(const SupportFilter& f, Direction d, const LabelPair& labels) {
  for (auto k : {SupportKind::emotional, SupportKind::informational}) {
    std::set<Level> chosen;
    for (const auto& s : f.selections)
      if (s.direction == d && s.kind == k) chosen.insert(s.level);
    if (!chosen.empty() && !chosen.count(labels.get(k))) return false;
  }
  return true;
}

void check_weights(const CircleNode& n) {
  if (n.level == NodeLevel::comment) {
    EXPECT_EQ(n.weight, 1u);
    return;
  }
  EXPECT_EQ(n.weight, n.children.size()) << n.ref_id;
  for (const auto& c : n.children) check_weights(c);
}

void check_geometry(const LayoutCircle& g, oracle::GeometryReport& rep) {
  std::vector<layout::Circle> kids;
  for (const auto& c : g.children) kids.push_back({c.x, c.y, c.r});
  oracle::check_siblings(kids, {g.x, g.y, g.r}, 1e-6, rep);
  for (const auto& c : g.children) check_geometry(c, rep);
}

}  // namespace

TEST(Filter, MatchesReferenceSemantics) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto d = trial % 2 ? Direction::providing : Direction::seeking;
    const auto f = random_filter(rng, d);
    const LabelPair lp{kLevels[rng() % 3], kLevels[rng() % 3]};
    EXPECT_EQ(f.allows(d, lp), reference_allows(f, d, lp));
    // Selections of the other direction never constrain.
    EXPECT_TRUE(f.allows(d == Direction::seeking ? Direction::providing : Direction::seeking, lp));
  }
}

TEST(Filter, AlgebraOnRandomTrees) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto tree = random_tree(rng);
    const auto all_posts = ids_at(tree, NodeLevel::post);
    const auto f = random_filter(rng, Direction::seeking);
    const auto once = apply_filter(tree, f);

    // Identity and idempotence.
    EXPECT_EQ(apply_filter(tree, SupportFilter{}), tree);
    EXPECT_EQ(apply_filter(once, f), once);

    // Selecting every level of one kind equals no constraint on it.
    SupportFilter full;
    for (auto l : kLevels) full.select(Direction::seeking, SupportKind::emotional, l);
    EXPECT_EQ(ids_at(apply_filter(tree, full), NodeLevel::post), all_posts);

    // Cross-kind intersection.
    SupportFilter emo, info, both;
    for (const auto& s : f.selections) {
      (s.kind == SupportKind::emotional ? emo : info).selections.insert(s);
      both.selections.insert(s);
    }
    const auto pe = ids_at(apply_filter(tree, emo), NodeLevel::post);
    const auto pi = ids_at(apply_filter(tree, info), NodeLevel::post);
    std::set<std::string> inter;
    std::set_intersection(pe.begin(), pe.end(), pi.begin(), pi.end(), std::inserter(inter, inter.end()));
    EXPECT_EQ(ids_at(apply_filter(tree, both), NodeLevel::post), inter);

    // Adding a level within a selected kind never removes posts.
    auto wider = f;
    wider.select(Direction::seeking, SupportKind::informational, kLevels[rng() % 3]);
    const auto narrow_ids = ids_at(once, NodeLevel::post);
    const auto wide_ids = ids_at(apply_filter(tree, wider), NodeLevel::post);
    if (!info.empty()) {
      EXPECT_TRUE(std::includes(wide_ids.begin(), wide_ids.end(), narrow_ids.begin(), narrow_ids.end()));
    }

    // Weights track surviving children and empty topics disappear.
    check_weights(once);
    for (const auto& t : once.children) EXPECT_FALSE(t.children.empty());
  }
}

TEST(Histogram, ConservesCounts) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto tree = random_tree(rng);
    const auto hs = histogram(tree, Direction::seeking);
    const auto hp = histogram(tree, Direction::providing);
    for (auto k : {SupportKind::emotional, SupportKind::informational}) {
      EXPECT_EQ(hs.total(k), ids_at(tree, NodeLevel::post).size());
      EXPECT_EQ(hp.total(k), ids_at(tree, NodeLevel::comment).size());
    }
    // Filtering by one bar leaves exactly that bar's count in that kind.
    const auto l = kLevels[rng() % 3];
    SupportFilter f;
    f.select(Direction::seeking, SupportKind::emotional, l);
    const auto filtered = histogram(apply_filter(tree, f), Direction::seeking);
    EXPECT_EQ(filtered.total(SupportKind::emotional), hs.count(SupportKind::emotional, l));
    EXPECT_EQ(filtered.count(SupportKind::emotional, l), hs.count(SupportKind::emotional, l));
  }
}

TEST(Pack, NestedCirclesStayDisjointAndContained) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const auto tree = random_tree(rng, 6, 12, 10);
    const auto g = pack(tree);
    EXPECT_DOUBLE_EQ(g.x, 0.5);
    EXPECT_DOUBLE_EQ(g.r, 0.5);
    oracle::GeometryReport rep;
    check_geometry(g, rep);
    EXPECT_EQ(rep.overlaps, 0u) << rep.worst_overlap;
    EXPECT_EQ(rep.escapes, 0u) << rep.worst_escape;
  }
}

TEST(Pack, RadiusGrowsWithWeight) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto tree = random_tree(rng, 6, 12, 10);
    const auto g = pack(tree);
    std::function<void(const CircleNode&, const LayoutCircle&)> walk = [&](const CircleNode& n, const LayoutCircle& l) {
      for (const auto& a : n.children)
        for (const auto& b : n.children) {
          const auto* la = l.find_child(a.ref_id);
          const auto* lb = l.find_child(b.ref_id);
          ASSERT_TRUE(la && lb);
          if (a.weight > b.weight && a.weight >= 1) {
            EXPECT_GT(la->r, lb->r);
          }
          if (a.weight == b.weight) {
            EXPECT_DOUBLE_EQ(la->r, lb->r);
          }
        }
      for (const auto& c : n.children) walk(c, *l.find_child(c.ref_id));
    };
    walk(tree, g);
  }
}

TEST(Pack, SingleChildIsConcentric) {
  const auto tree = root_of({topic("0", {post("p1", 1, Level::low, Level::low, {})})});
  const auto g = pack(tree);
  ASSERT_EQ(g.children.size(), 1u);
  EXPECT_NEAR(g.children[0].x, 0.5, 1e-12);
  EXPECT_NEAR(g.children[0].y, 0.5, 1e-12);
  EXPECT_NEAR(g.children[0].r, 0.5 * 0.97, 1e-12);
  // Zero-comment posts still get a visible circle.
  ASSERT_EQ(g.children[0].children.size(), 1u);
  EXPECT_GT(g.children[0].children[0].r, 0.0);
}

TEST(Explorer, ZoomLevelsAndScopedPostList) {
  const auto tree = root_of({
      topic("0", {post("p2", 2, Level::high, Level::low, {comment("c1", Level::high, Level::high)}),
                  post("p1", 1, Level::low, Level::low, {})}),
      topic("1", {post("p3", 3, Level::medium, Level::high, {comment("c2", Level::low, Level::low)})}),
  });
  Explorer ex(tree);
  auto v = ex.current();
  EXPECT_EQ(v.level, ViewLevel::topic);
  EXPECT_EQ(v.post_ids, (std::vector<std::string>{"p1", "p2", "p3"}));

  v = ex.zoom({"0"});
  EXPECT_EQ(v.level, ViewLevel::post);
  EXPECT_EQ(v.post_ids, (std::vector<std::string>{"p1", "p2"}));
  EXPECT_EQ(v.histogram.direction, Direction::seeking);

  v = ex.zoom({"0", "p2"});
  EXPECT_EQ(v.level, ViewLevel::comment);
  EXPECT_EQ(v.post_ids, (std::vector<std::string>{"p2"}));
  EXPECT_EQ(v.histogram.direction, Direction::providing);
  EXPECT_EQ(v.histogram.count(SupportKind::emotional, Level::high), 1u);

  EXPECT_THROW(ex.zoom({"0", "p2", "c1"}), BadRequest);
  EXPECT_THROW(ex.zoom({"9"}), StaleView);
  EXPECT_EQ(ex.path(), (std::vector<std::string>{"0", "p2"}));

  // Zooming back out restores the original view.
  const auto top = ex.zoom({});
  EXPECT_EQ(top.post_ids, (std::vector<std::string>{"p1", "p2", "p3"}));
  EXPECT_EQ(top.node, &ex.visible());
}

TEST(Explorer, FilterBumpsVersionAndTruncatesPath) {
  const auto tree = root_of({
      topic("0", {post("p1", 1, Level::high, Level::low, {comment("c1", Level::high, Level::low)})}),
      topic("1", {post("p2", 2, Level::low, Level::low, {comment("c2", Level::low, Level::high)})}),
  });
  Explorer ex(tree);
  ex.zoom({"1"});
  const auto v0 = ex.version();

  SupportFilter f;
  f.select(Direction::seeking, SupportKind::emotional, Level::high);
  const auto v = ex.set_filter(f);
  EXPECT_EQ(ex.version(), v0 + 1);
  EXPECT_TRUE(ex.path().empty());
  EXPECT_EQ(v.post_ids, (std::vector<std::string>{"p1"}));
  EXPECT_THROW(ex.zoom({"1"}, ex.version()), StaleView);
  EXPECT_THROW(ex.zoom({"0"}, v0), StaleView);

  // Wrong direction for the level.
  SupportFilter wrong;
  wrong.select(Direction::providing, SupportKind::emotional, Level::low);
  EXPECT_THROW(ex.set_filter(wrong), BadRequest);

  // At comment level, providing selections combine with the seeking ones.
  ex.zoom({"0", "p1"}, ex.version());
  SupportFilter prov;
  prov.select(Direction::providing, SupportKind::informational, Level::high);
  const auto cv = ex.set_filter(prov);
  EXPECT_EQ(ex.filter().selections.size(), 2u);
  EXPECT_TRUE(ex.visible().find_child("0")->find_child("p1")->children.empty());
  EXPECT_EQ(cv.level, ViewLevel::comment);

  // Clearing the seeking selection from the top brings p2 back.
  ex.zoom({}, ex.version());
  ex.set_filter(SupportFilter{});
  EXPECT_EQ(ex.current().post_ids, (std::vector<std::string>{"p1", "p2"}));
  EXPECT_EQ(ex.filter().selections.size(), 1u);
}

TEST(Hierarchy, BuiltFromSearchAndTopics) {
  std::vector<RawRecord> recs{
      {"p1", std::nullopt, "exam", "exam stress", 1},
      {"p2", std::nullopt, "sleep", "no sleep", 2},
      {"c1", "t3_p1", std::nullopt, "you got this", 3},
      {"c2", "t1_c1", std::nullopt, "agreed", 4},
  };
  const auto corpus = Corpus::from_records(recs);
  LabelTable labels;
  labels.set("p1", Direction::seeking, SupportKind::emotional, Level::high);
  labels.set("c1", Direction::providing, SupportKind::informational, Level::medium);
  const std::vector<SearchResult> results{{"p2", 2.0, 1}, {"p1", 1.0, 2}};
  const std::vector<TopicAssignment> assign{{"p1", 1, 0.9, false}, {"p2", 1, 0.6, false}};
  const std::vector<KeywordSet> kw{{0, {"a"}}, {1, {"exam", "sleep"}}};

  const auto h = build_hierarchy(results, assign, kw, labels, corpus);
  ASSERT_EQ(h.children.size(), 1u);
  const auto& t = h.children[0];
  EXPECT_EQ(t.ref_id, "topic-1");
  EXPECT_EQ(t.weight, 2u);
  ASSERT_TRUE(t.keywords);
  EXPECT_EQ(t.keywords->keywords, (std::vector<std::string>{"exam", "sleep"}));
  const auto* p1 = t.find_child("p1");
  ASSERT_TRUE(p1);
  EXPECT_EQ(p1->weight, 2u);
  EXPECT_EQ(p1->rank, 2u);
  EXPECT_EQ(p1->labels->emotional, Level::high);
  EXPECT_EQ(p1->find_child("c1")->labels->informational, Level::medium);
  EXPECT_EQ(t.find_child("p2")->weight, 0u);

  EXPECT_THROW(build_hierarchy({{"p1", 1, 1}}, {}, kw, labels, corpus), BadRequest);
  EXPECT_THROW(build_hierarchy({{"zz", 1, 1}}, {{"zz", 0, 1, false}}, kw, labels, corpus), NotFound);
}
