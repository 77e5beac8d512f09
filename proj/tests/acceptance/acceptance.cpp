// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "api.hpp"
#include "comviewer/comviewer.hpp"
#include "fixture.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

extern char** environ;

using namespace comviewer;
using api::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double took = seconds_since(t0);
  if (budget_s > 0 && took >= budget_s) out.require(false, "runtime " + std::to_string(took) + " s over budget");
  char line[512];
  std::snprintf(line, sizeof line, "%s  %-22s %8.3f s%s%s", out.pass ? "PASS" : "FAIL", name.c_str(), took,
                budget_s > 0 ? (" (budget " + std::to_string(static_cast<int>(budget_s)) + " s)").c_str() : "",
                out.detail.empty() ? "" : ("  " + out.detail).c_str());
  std::puts(line);
  std::fflush(stdout);
  if (!out.pass) ++failures;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- ingest ------------------------------------------------------------------

Outcome ingest_fidelity() {
  Outcome o;
  const auto dir = fixtures::scratch("acc-ingest");
  {
    std::ofstream(dir / "six.jsonl") << fixtures::kSixRecords;
  }
  const auto stats = ingest(dir / "six.jsonl", dir / "store");
  // Hand counts: p1 and p2 kept, c1 and c2 kept, c3 tombstoned body,
  // c4 orphaned by a "[removed]" parent.
  o.require(stats.n_raw == 6, "n_raw");
  o.require(stats.n_posts == 2, "n_posts");
  o.require(stats.n_comments == 2, "n_comments");
  o.require(stats.n_dropped_tombstone_body == 1, "tombstone body");
  o.require(stats.n_dropped_tombstone_id == 1, "tombstone parent id");
  o.require(stats.n_dropped_orphan == 0, "orphans");
  const auto six = Corpus::load(dir / "store");
  o.require(six.post_count() == 2 && six.comment_count() == 2, "reload counts");

  // Any input: no stored body is a tombstone.
  fixture::write_desk_dump(dir / "desk.jsonl", {200, 7});
  const auto desk = Corpus::from_dump(dir / "desk.jsonl");
  std::size_t tombstones = 0;
  for (const auto& p : desk.posts()) tombstones += is_tombstone(p.body);
  for (const auto* c : desk.all_comments()) tombstones += is_tombstone(c->body);
  o.require(tombstones == 0, std::to_string(tombstones) + " tombstone bodies stored");
  o.require(desk.stats().n_dropped_tombstone_body > 0, "desk fixture exercises body tombstones");
  o.detail = o.pass ? "6-record counts exact; desk: 0 tombstone bodies of " +
                          std::to_string(desk.post_count() + desk.comment_count())
                    : o.detail;
  return o;
}

// --- search ------------------------------------------------------------------

Outcome search_oracle() {
  Outcome o;
  std::mt19937_64 rng(31);
  const std::vector<std::string> words{"exam", "sleep", "panic", "work", "tea", "music", "night", "boss", "the"};
  std::size_t checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<oracle::Doc> docs;
    for (std::size_t i = 0, n = 1 + rng() % 10; i < n; ++i) {
      std::string text;
      for (std::size_t w = 0, len = rng() % 8; w < len; ++w) text += words[rng() % words.size()] + " ";
      docs.push_back({"d" + std::to_string(i), text});
    }
    const auto index = InvertedIndex::build(docs);
    for (int q = 0; q < 5; ++q) {
      std::string query;
      for (std::size_t w = 0, len = 1 + rng() % 3; w < len; ++w) query += words[rng() % words.size()] + " ";
      const auto expected = oracle::tfidf_scores(docs, query);
      const auto got = index.search(query, SearchConfig{150});
      o.require(got.results.size() <= 150, "more than n_top results");
      o.require(got.results.size() == expected.size(), "result set differs from oracle");
      for (const auto& r : got.results) {
        auto it = expected.find(r.post_id);
        o.require(it != expected.end() && std::abs(it->second - r.score) <= 1e-9, "score off by more than 1e-9");
      }
      ++checked;
    }
  }
  // Cap on a larger corpus.
  std::vector<oracle::Doc> many;
  for (int i = 0; i < 400; ++i) many.push_back({"m" + std::to_string(1000 + i), i % 2 ? "exam stress" : "exam"});
  many.push_back({"z", "other"});
  o.require(InvertedIndex::build(many).search("exam", SearchConfig{150}).results.size() == 150, "n_top cap");
  if (o.pass) o.detail = std::to_string(checked) + " queries match at 1e-9; cap 150 holds";
  return o;
}

// --- LDA ---------------------------------------------------------------------

Outcome lda_separation() {
  Outcome o;
  std::vector<std::size_t> truth;
  const auto docs = fixtures::two_vocabularies(&truth);
  LdaConfig cfg;
  cfg.k = 2;
  cfg.seed = 42;
  const auto a = fit_lda(docs, cfg);
  const auto b = fit_lda(docs, cfg);
  std::vector<std::size_t> cluster;
  for (const auto& x : assign_topics(a, docs)) cluster.push_back(x.topic_id);
  const double purity = oracle::purity(cluster, truth);
  o.require(purity >= 0.9, "purity " + std::to_string(purity));
  o.require(a == b, "same-seed reruns differ");
  // Byte identity of what a client sees: assignments and keywords.
  auto dump = [&](const TopicModel& m) {
    std::ostringstream ss;
    ss.precision(17);
    for (const auto& x : assign_topics(m, docs)) ss << x.post_id << ' ' << x.topic_id << ' ' << x.proportion << '\n';
    for (const auto& ks : topic_keywords(m, 5))
      for (const auto& w : ks.keywords) ss << w << ' ';
    return ss.str();
  };
  o.require(dump(a) == dump(b), "rerun output bytes differ");
  if (o.pass) o.detail = "purity " + std::to_string(purity) + "; reruns byte-identical";
  return o;
}

// --- similarity --------------------------------------------------------------

Outcome similarity_oracle() {
  Outcome o;
  std::mt19937_64 rng(41);
  const std::vector<std::string> words{"exam", "sleep", "panic", "work", "tea", "music", "breath", "night", "boss", "friend"};
  std::size_t corpora = 0, pairs_seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<oracle::Doc> docs;
    std::vector<TextItem> items;
    for (std::size_t i = 0, n = 2 + rng() % 49; i < n; ++i) {
      std::string text;
      for (std::size_t w = 0, len = rng() % 7; w < len; ++w) text += words[rng() % 4 + (i % 4) * 2] + " ";
      char id[8];
      std::snprintf(id, sizeof id, "p%03zu", i);
      docs.push_back({id, text});
      items.push_back({id, text});
    }
    const auto vecs = TfidfVectorizer::fit(items).embed(items);
    std::size_t previous = SIZE_MAX;
    std::set<std::pair<std::string, std::string>> previous_set;
    for (double theta : {0.4, 0.6, 0.8}) {
      std::set<std::pair<std::string, std::string>> got, brute;
      for (const auto& p : similar_pairs(vecs, theta)) got.insert({p.post_a, p.post_b});
      for (std::size_t i = 0; i < docs.size(); ++i)
        for (std::size_t j = i + 1; j < docs.size(); ++j)
          if (oracle::tfidf_cosine(docs, i, j) >= theta - 1e-12) brute.insert({docs[i].first, docs[j].first});
      o.require(got == brute, "pair set differs from brute force at theta " + std::to_string(theta));
      o.require(got.size() <= previous, "pair count not monotone");
      if (previous != SIZE_MAX)
        o.require(std::includes(previous_set.begin(), previous_set.end(), got.begin(), got.end()),
                  "higher threshold added a pair");
      previous = got.size();
      previous_set = got;
      if (theta == 0.6) pairs_seen += got.size();
    }
    ++corpora;
  }
  if (o.pass) o.detail = std::to_string(corpora) + " corpora, " + std::to_string(pairs_seen) + " pairs at 0.6 match";
  return o;
}

// --- packing ------------------------------------------------------------------

void check_layout(const CircleNode& n, const LayoutCircle& g, oracle::GeometryReport& rep, std::size_t& radius_bad) {
  std::vector<layout::Circle> kids;
  for (const auto& c : g.children) kids.push_back({c.x, c.y, c.r});
  oracle::check_siblings(kids, {g.x, g.y, g.r}, 1e-6, rep);
  for (const auto& a : n.children)
    for (const auto& b : n.children)
      if (a.weight > b.weight && !(g.find_child(a.ref_id)->r > g.find_child(b.ref_id)->r)) ++radius_bad;
  for (const auto& c : n.children) check_layout(c, *g.find_child(c.ref_id), rep, radius_bad);
}

Outcome packing_geometry() {
  Outcome o;
  std::mt19937_64 rng(51);
  oracle::GeometryReport rep;
  std::size_t radius_bad = 0, max_nodes = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t budget = 3 + rng() % 498;  // total nodes, root included
    CircleNode root;
    root.ref_id = "root";
    std::size_t nodes = 1, id = 0;
    const std::size_t topics = 1 + rng() % 8;
    for (std::size_t t = 0; t < topics && nodes < budget; ++t, ++nodes) {
      CircleNode topic;
      topic.level = NodeLevel::topic;
      topic.ref_id = std::to_string(t);
      root.children.push_back(topic);
    }
    // Deal posts and comments at random until the node budget is spent.
    while (nodes < budget) {
      auto& topic = root.children[rng() % root.children.size()];
      if (topic.children.empty() || rng() % 3 == 0) {
        CircleNode post;
        post.level = NodeLevel::post;
        post.ref_id = "p" + std::to_string(id++);
        topic.children.push_back(post);
      } else {
        auto& post = topic.children[rng() % topic.children.size()];
        CircleNode c;
        c.level = NodeLevel::comment;
        c.ref_id = "c" + std::to_string(id++);
        c.weight = 1;
        post.children.push_back(c);
      }
      ++nodes;
    }
    for (auto& t : root.children) {
      for (auto& p : t.children) p.weight = p.children.size();
      t.weight = t.children.size();
    }
    max_nodes = std::max(max_nodes, nodes);
    check_layout(root, pack(root), rep, radius_bad);
  }
  o.require(rep.overlaps == 0, std::to_string(rep.overlaps) + " sibling overlaps, worst " + std::to_string(rep.worst_overlap));
  o.require(rep.escapes == 0, std::to_string(rep.escapes) + " containment violations, worst " + std::to_string(rep.worst_escape));
  o.require(radius_bad == 0, std::to_string(radius_bad) + " radius order violations");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "1000 trees up to %zu nodes; worst overlap %.2e, worst escape %.2e", max_nodes,
                  rep.worst_overlap, rep.worst_escape);
    o.detail = buf;
  }
  return o;
}

// --- filter algebra -----------------------------------------------------------

std::set<std::string> refs_at(const CircleNode& n, NodeLevel level) {
  std::set<std::string> out;
  std::function<void(const CircleNode&)> walk = [&](const CircleNode& x) {
    if (x.level == level) out.insert(x.ref_id);
    for (const auto& c : x.children) walk(c);
  };
  walk(n);
  return out;
}

Outcome filter_algebra() {
  Outcome o;
  const std::vector<Level> levels{Level::high, Level::medium, Level::low};
  std::mt19937_64 rng(61);
  auto random_tree = [&] {
    CircleNode root;
    std::size_t id = 0;
    for (std::size_t t = 0, nt = 1 + rng() % 4; t < nt; ++t) {
      CircleNode topic;
      topic.level = NodeLevel::topic;
      topic.ref_id = std::to_string(t);
      for (std::size_t p = 0, np = 1 + rng() % 6; p < np; ++p) {
        CircleNode post;
        post.level = NodeLevel::post;
        post.ref_id = "p" + std::to_string(id++);
        post.labels = LabelPair{levels[rng() % 3], levels[rng() % 3]};
        for (std::size_t c = 0, nc = rng() % 6; c < nc; ++c) {
          CircleNode cm;
          cm.level = NodeLevel::comment;
          cm.ref_id = "c" + std::to_string(id++);
          cm.weight = 1;
          cm.labels = LabelPair{levels[rng() % 3], levels[rng() % 3]};
          post.children.push_back(cm);
        }
        post.weight = post.children.size();
        topic.children.push_back(post);
      }
      topic.weight = topic.children.size();
      root.children.push_back(topic);
    }
    root.weight = root.children.size();
    return root;
  };
  std::size_t trees = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto tree = random_tree();
    const auto dir = trial % 2 ? Direction::providing : Direction::seeking;
    const auto leaf = dir == Direction::seeking ? NodeLevel::post : NodeLevel::comment;
    SupportFilter f;
    for (auto k : {SupportKind::emotional, SupportKind::informational})
      for (auto l : levels)
        if (rng() % 3 == 0) f.select(dir, k, l);
    const auto once = apply_filter(tree, f);
    o.require(apply_filter(once, f) == once, "not idempotent");
    o.require(apply_filter(tree, SupportFilter{}) == tree, "empty selection is not the identity");
    for (auto k : {SupportKind::emotional, SupportKind::informational}) {
      SupportFilter full;
      for (auto l : levels) full.select(dir, k, l);
      o.require(refs_at(apply_filter(tree, full), leaf) == refs_at(tree, leaf), "full union is not the identity");
    }
    SupportFilter emo, info;
    for (const auto& s : f.selections) (s.kind == SupportKind::emotional ? emo : info).selections.insert(s);
    const auto a = refs_at(apply_filter(tree, emo), leaf);
    const auto b = refs_at(apply_filter(tree, info), leaf);
    std::set<std::string> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(both, both.end()));
    o.require(refs_at(once, leaf) == both, "cross-kind result is not the intersection");

    // Both "high" providing bars: only doubly-high comments remain.
    SupportFilter hh;
    hh.select(Direction::providing, SupportKind::emotional, Level::high);
    hh.select(Direction::providing, SupportKind::informational, Level::high);
    std::function<void(const CircleNode&)> only_high = [&](const CircleNode& n) {
      if (n.level == NodeLevel::comment)
        o.require(n.labels->emotional == Level::high && n.labels->informational == Level::high,
                  "double-high filter kept " + n.ref_id);
      for (const auto& c : n.children) only_high(c);
    };
    const auto filtered = apply_filter(tree, hh);
    only_high(filtered);
    std::size_t expected = 0;
    std::function<void(const CircleNode&)> count = [&](const CircleNode& n) {
      if (n.level == NodeLevel::comment && n.labels->emotional == Level::high && n.labels->informational == Level::high)
        ++expected;
      for (const auto& c : n.children) count(c);
    };
    count(tree);
    o.require(refs_at(filtered, NodeLevel::comment).size() == expected, "double-high filter dropped a match");
    ++trees;
  }
  if (o.pass) o.detail = std::to_string(trees) + " random trees";
  return o;
}

// --- highlights ---------------------------------------------------------------

Outcome highlight_round_trip() {
  Outcome o;
  const auto dir = fixtures::scratch("acc-highlight");
  fixture::write_desk_dump(dir / "desk.jsonl", {200, 7});
  const auto corpus = Corpus::from_dump(dir / "desk.jsonl");
  std::vector<std::string> targets;
  for (const auto& p : corpus.posts()) {
    if (!p.body.empty()) targets.push_back(p.id);
    for (const auto& c : p.comment_ids) targets.push_back(c);
  }
  const BodyLookup bodies = [&](std::string_view id) -> std::optional<std::string> {
    if (const auto* b = corpus.body_of(id)) return *b;
    return std::nullopt;
  };
  const std::vector<std::string> colors{"yellow", "green", "red"};
  std::mt19937_64 rng(71);
  NoteBook nb;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<std::size_t, std::size_t>>> spans;
  // Small target pool so spans collide often.
  std::vector<std::string> pool;
  for (int i = 0; i < 12; ++i) pool.push_back(targets[rng() % targets.size()]);
  std::size_t resolved = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& target = pool[rng() % pool.size()];
    const auto body = *bodies(target);
    const auto len = text::utf8_length(body);
    if (len == 0) continue;
    const std::size_t a = rng() % len;
    const std::size_t b = a + 1 + rng() % std::min<std::size_t>(12, len - a);
    const Anchor anchor{target, a, b, text::utf8_substr(body, a, b)};
    const auto& color = colors[rng() % colors.size()];
    const auto id = nb.add_highlight(anchor, color, bodies).id;
    spans[{target, color}].push_back({a, b});
    const auto& back = nb.navigate(id);
    o.require(text::utf8_substr(body, back.char_start, back.char_end) == back.exact_text, "navigate text mismatch");
    o.require(back.char_start <= a && b <= back.char_end, "merged span lost the new range");
    ++resolved;

    std::size_t in_folders = 0;
    std::set<std::string> seen;
    for (const auto& f : nb.folders())
      for (const auto& e : f.entries) {
        ++in_folders;
        seen.insert(e);
        o.require(nb.get(e).color == f.color, "entry in the wrong folder");
      }
    o.require(in_folders == nb.size() && seen.size() == nb.size(), "folders do not partition highlights");
  }
  for (const auto& [key, ivs] : spans) {
    std::vector<std::pair<std::size_t, std::size_t>> got;
    for (const auto* h : nb.highlights_on(key.first))
      if (h->color == key.second) got.push_back({h->anchor.char_start, h->anchor.char_end});
    std::sort(got.begin(), got.end());
    o.require(got == oracle::interval_union(ivs), "merge differs from interval union on " + key.first);
  }
  // Random recolor/clear/edit sequences keep the partition.
  std::vector<std::string> ids;
  for (const auto* h : nb.highlights()) ids.push_back(h->id);
  for (int i = 0; i < 300 && !ids.empty(); ++i) {
    const auto pick = rng() % ids.size();
    const auto id = ids[pick];
    switch (rng() % 3) {
      case 0: {
        const auto& kept = nb.recolor(id, colors[rng() % 3], bodies);
        if (kept.id != id) ids.erase(ids.begin() + static_cast<long>(pick));
        break;
      }
      case 1:
        nb.clear(id);
        ids.erase(ids.begin() + static_cast<long>(pick));
        break;
      default:
        nb.edit_entry(id, "note " + std::to_string(i));
    }
    // Recolor merges can absorb other ids too.
    std::erase_if(ids, [&](const std::string& x) {
      try {
        nb.get(x);
        return false;
      } catch (const NotFound&) {
        return true;
      }
    });
    std::size_t in_folders = 0;
    for (const auto& f : nb.folders()) in_folders += f.entries.size();
    o.require(in_folders == nb.size() && nb.size() == ids.size(), "partition broken after random ops");
  }
  if (o.pass) o.detail = std::to_string(resolved) + " anchors resolved; merges match interval union";
  return o;
}

// --- prompts -------------------------------------------------------------------

std::string read_test_data(const std::string& name) {
  std::ifstream in(std::string(COMVIEWER_SOURCE_DIR) + "/tests/data/" + name, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reference prompt text with markup reduced to plain characters.
std::vector<std::string> reference_prompts() {
  std::vector<std::string> out;
  for (const char* name : {"prompt_summary.txt", "prompt_questions.txt", "prompt_answer.txt"}) {
    auto text = read_test_data(name);
    if (!text.empty()) out.push_back(std::move(text));
  }
  return out;
}

Outcome prompt_fidelity() {
  Outcome o;
  const auto ref = reference_prompts();
  o.require(ref.size() == 3, "reference prompts not found");
  if (!o.pass) return o;
  // Render with sentinel values, then put the placeholder names back.
  auto unrender = [](std::string s, const std::string& value, const std::string& placeholder) {
    const auto at = s.find(value);
    if (at != std::string::npos) s.replace(at, value.size(), placeholder);
    return s;
  };
  const std::string sv = "\x01SUGGESTIONS\x01", qv = "\x01STATEMENT\x01";
  o.require(unrender(llm::render_summary_prompt({sv}), sv, "{suggestions}") == ref[0], "summary prompt bytes");
  o.require(unrender(llm::render_questions_prompt(qv, std::nullopt), qv, "{current statement}") == ref[1],
            "questions prompt bytes");
  const auto ans = llm::render_answer_prompt("Q?", "S.");
  o.require(ans.substr(0, ans.find('\n')) == ref[2], "answer prompt bytes");

  const auto doc = llm::parse_summary(read_test_data("example_response.txt"));
  o.require(doc.has_value(), "example response did not parse");
  if (!doc) return o;
  o.require(doc->title == "Strategies for Relaxation and Better Sleep", "title '" + doc->title + "'");
  o.require(doc->sections.size() == 4, std::to_string(doc->sections.size()) + " subtitles");
  const auto map = llm::derive_mindmap(*doc);
  o.require(map.nodes.size() == 4, "mind map first level has " + std::to_string(map.nodes.size()) + " nodes");

  auto pipeline = [] {
    llm::StubChatProvider stub;
    std::ostringstream ss;
    const auto s = llm::summarize({"Drink some chamomile tea.", "Put on lofi music."}, "yellow", stub);
    ss << s.doc.title;
    for (const auto& sec : s.doc.sections) ss << '|' << sec.subtitle << '|' << sec.content;
    const auto m = llm::derive_mindmap(s.doc);
    for (const auto& n : m.nodes) ss << '#' << n.label;
    QuestionBoard board("b1", "Try to focus on relaxing your muscles.");
    board.set_recommended(llm::recommend_questions(board.selected_text(), std::nullopt, stub).questions, false);
    const auto id = board.add_thread(board.recommended()[0], QuestionOrigin::recommended).id;
    board.resolve(id, stub);
    for (const auto& q : board.recommended()) ss << '?' << q;
    ss << '=' << board.find(id)->answer;
    for (const auto& q : board.find(id)->recommendations) ss << '+' << q;
    return ss.str();
  };
  const auto first = pipeline();
  o.require(first == pipeline(), "stub pipeline differs between runs");
  if (o.pass) o.detail = "3 templates byte-match; example parses to 4 sections; stub pipeline deterministic";
  return o;
}

// --- end to end ------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, const std::filesystem::path& log) {
  std::string cmd = "'" + std::string(COMVIEWER_CLI) + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >>'" + log.string() + "' 2>&1";
  return std::system(cmd.c_str());
}

pid_t spawn_cli(const std::vector<std::string>& args, const std::filesystem::path& log) {
  std::vector<std::string> all{COMVIEWER_CLI};
  all.insert(all.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : all) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, log.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw std::runtime_error("cannot start " + all[0]);
  return pid;
}

Outcome end_to_end() {
  Outcome o;
  const auto dir = fixtures::scratch("acc-e2e");
  const auto store = dir / "store", index = store / "index", log = dir / "cli.log";
  ::setenv("LLM_BASE_URL", "stub:", 1);

  const std::vector<std::vector<std::string>> steps{
      {"fixture", "--out", (dir / "desk.jsonl").string(), "--posts", "200"},
      {"ingest", "--dump", (dir / "desk.jsonl").string(), "--out", store.string()},
      {"index", "--store", store.string(), "--out", index.string()},
      {"label", "--store", store.string()},
      {"pairs", "--store", store.string()},
  };
  for (const auto& s : steps) {
    if (run_cli(s, log) != 0) {
      o.require(false, "`comviewer " + s[0] + "` failed; see " + log.string());
      return o;
    }
  }
  const pid_t server = spawn_cli({"serve", "--store", store.string(), "--index", index.string(), "--port", "0",
                                  "--port-file", (dir / "port").string()},
                                 log);
  struct Reaper {
    pid_t pid;
    ~Reaper() {
      ::kill(pid, SIGTERM);
      int st = 0;
      ::waitpid(pid, &st, 0);
    }
  } reaper{server};

  int port = 0;
  for (int i = 0; i < 500 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    if (std::filesystem::exists(dir / "port")) port = std::atoi(slurp(dir / "port").c_str());
  }
  o.require(port > 0, "server did not report a port");
  if (!o.pass) return o;

  const auto schemas = SchemaRegistry::load_dir(std::string(COMVIEWER_SOURCE_DIR) + "/schemas");
  api::Client c("127.0.0.1", port, &schemas);
  std::size_t requests = 0;
  auto step = [&](const std::string& what, api::Reply r, int status, const std::string& schema) {
    ++requests;
    o.require(r.status == status, what + ": HTTP " + std::to_string(r.status) + " " + r.raw.substr(0, 200));
    const auto errs = c.check(r, schema);
    o.require(errs.empty(), what + ": " + (errs.empty() ? "" : errs[0]));
    return r.body;
  };

  const auto s = step("session", c.post("/api/session"), 201, "session")["id"].get<std::string>();
  auto v = step("search", c.get("/api/search?q=exam%20sleep&session=" + s), 200, "view");
  o.require(v["status"] == "ok" && v["root"].is_object() && !v["root"]["children"].empty(), "search found nothing");
  if (!o.pass) return o;

  // Zoom x3: topic view, then a topic, then its largest post.
  const auto topic = v["root"]["children"][0];
  std::string post;
  std::size_t most = 0;
  for (const auto& p : topic["children"])
    if (p["weight"].get<std::size_t>() >= most) {
      most = p["weight"];
      post = p["ref_id"];
    }
  auto version = v["view_version"].get<std::uint64_t>();
  step("zoom root", c.post("/api/zoom", {{"session", s}, {"path", json::array()}, {"version", version}}), 200, "view");
  auto zt = step("zoom topic", c.post("/api/zoom", {{"session", s}, {"path", {topic["ref_id"]}}, {"version", version}}),
                 200, "view");
  o.require(zt["level"] == "post", "topic zoom level");
  auto zp = step("zoom post",
                 c.post("/api/zoom", {{"session", s}, {"path", {topic["ref_id"], post}}, {"version", version}}), 200,
                 "view");
  o.require(zp["level"] == "comment", "post zoom level");

  step("filter", c.post("/api/filter", {{"session", s},
                                        {"selections", {{{"direction", "providing"}, {"kind", "emotional"}, {"level", "high"}},
                                                        {{"direction", "providing"}, {"kind", "emotional"}, {"level", "medium"}}}}}),
       200, "view");

  auto detail = step("post", c.get("/api/post/" + post + "?session=" + s), 200, "post");
  std::vector<std::pair<std::string, std::string>> targets{{detail["post"]["id"], detail["post"]["body"]}};
  for (const auto& cm : detail["comments"]) targets.push_back({cm["id"], cm["body"]});
  std::size_t made = 0;
  for (std::size_t i = 0; i < targets.size() && made < 3; ++i) {
    const auto& body = targets[i].second;
    const auto len = text::utf8_length(body);
    if (len < 8) continue;
    step("highlight", c.post("/api/highlight", {{"session", s},
                                                {"color", "yellow"},
                                                {"anchor", {{"target", targets[i].first},
                                                            {"char_start", 0},
                                                            {"char_end", 8},
                                                            {"exact_text", text::utf8_substr(body, 0, 8)}}}}),
         201, "highlight");
    ++made;
  }
  o.require(made == 3, "only " + std::to_string(made) + " highlightable targets");
  step("folder", c.get("/api/folder/yellow?session=" + s), 200, "folder");

  auto job = step("summarize", c.post("/api/folder/yellow/summarize", {{"session", s}}), 202, "job");
  auto done = step("summary job", c.wait_job(job["id"], s), 200, "job");
  o.require(done["status"] == "succeeded", "summary job " + done.dump());
  step("mindmap", c.get("/api/mindmap/yellow?session=" + s), 200, "mindmap");

  auto board = step("board", c.post("/api/board", {{"session", s}, {"selected_text", targets[0].second.substr(0, 40)},
                                                   {"target", targets[0].first}}),
                    202, "board_job");
  const auto bid = board["board"]["id"].get<std::string>();
  step("questions job", c.wait_job(board["job"]["id"], s), 200, "job");
  auto ask = step("ask", c.post("/api/board/" + bid + "/ask", {{"session", s}, {"question", "Why does this help?"}}), 202,
                  "board_job");
  auto answered = step("answer job", c.wait_job(ask["job"]["id"], s), 200, "job");
  o.require(answered["status"] == "succeeded", "answer job " + answered.dump());
  auto final_board = step("board state", c.get("/api/board/" + bid + "?session=" + s), 200, "board");
  o.require(final_board["recommended"].size() == 3, "board has no 3 recommendations");
  o.require(final_board["threads"].size() == 1 && final_board["threads"][0]["state"] == "answered",
            "question not answered");
  if (o.pass) o.detail = std::to_string(requests) + " requests, all schema-valid";
  return o;
}

}  // namespace

int main() {
  criterion("ingest-fidelity", 1, ingest_fidelity);
  criterion("search-oracle", 1, search_oracle);
  criterion("lda-separation", 5, lda_separation);
  criterion("similarity-oracle", 0, similarity_oracle);
  criterion("packing-geometry", 30, packing_geometry);
  criterion("filter-algebra", 0, filter_algebra);
  criterion("highlight-round-trip", 0, highlight_round_trip);
  criterion("prompt-fidelity", 0, prompt_fidelity);
  criterion("end-to-end", 60, end_to_end);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
