#include "comviewer/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "comviewer/error.hpp"
#include "comviewer/text.hpp"
#include "json.hpp"

namespace comviewer {
namespace {

using nlohmann::json;

constexpr std::string_view kStoreHeader = "comviewer-corpus\t1";

std::optional<std::string> string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  return std::nullopt;
}

std::optional<std::int64_t> time_field(const json& obj) {
  auto it = obj.find("created_utc");
  if (it == obj.end() || it->is_null()) return std::int64_t{0};
  if (it->is_number()) return static_cast<std::int64_t>(it->get<double>());
  if (it->is_string()) {
    try {
      return static_cast<std::int64_t>(std::stoll(it->get<std::string>()));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// Reddit fullnames prefix ids with their kind ("t3_" posts, "t1_" comments).
std::string_view strip_kind_prefix(std::string_view id) {
  if (id.size() > 3 && id[0] == 't' && (id[1] == '1' || id[1] == '3') && id[2] == '_')
    id.remove_prefix(3);
  return id;
}

json post_to_json(const Post& p) {
  return json{{"id", p.id},
              {"title", p.title},
              {"body", p.body},
              {"created_utc", p.created_utc},
              {"comment_ids", p.comment_ids}};
}

json comment_to_json(const Comment& c) {
  return json{{"id", c.id},
              {"post_id", c.post_id},
              {"body", c.body},
              {"created_utc", c.created_utc},
              {"depth", c.depth}};
}

json stats_to_json(const CorpusStats& s) {
  return json{{"n_raw", s.n_raw},
              {"n_posts", s.n_posts},
              {"n_comments", s.n_comments},
              {"n_dropped_tombstone_id", s.n_dropped_tombstone_id},
              {"n_dropped_tombstone_body", s.n_dropped_tombstone_body},
              {"n_dropped_orphan", s.n_dropped_orphan},
              {"n_malformed", s.n_malformed}};
}

CorpusStats stats_from_json(const json& j) {
  CorpusStats s;
  s.n_raw = j.value("n_raw", std::uint64_t{0});
  s.n_posts = j.value("n_posts", std::uint64_t{0});
  s.n_comments = j.value("n_comments", std::uint64_t{0});
  s.n_dropped_tombstone_id = j.value("n_dropped_tombstone_id", std::uint64_t{0});
  s.n_dropped_tombstone_body = j.value("n_dropped_tombstone_body", std::uint64_t{0});
  s.n_dropped_orphan = j.value("n_dropped_orphan", std::uint64_t{0});
  s.n_malformed = j.value("n_malformed", std::uint64_t{0});
  return s;
}

}  // namespace

bool is_tombstone(std::string_view s) {
  s = text::trim(s);
  return s == "[deleted]" || s == "[removed]";
}

std::string Post::full_text() const {
  if (title.empty()) return body;
  if (body.empty()) return title;
  return title + "\n\n" + body;
}

std::optional<RawRecord> parse_record(std::string_view line) {
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;

  RawRecord r;
  auto id = string_field(obj, "id");
  if (!id || id->empty()) return std::nullopt;
  r.id = std::move(*id);
  r.parent_id = string_field(obj, "parent_id");
  if (r.parent_id && r.parent_id->empty()) r.parent_id.reset();
  r.title = string_field(obj, "title");

  auto body = string_field(obj, "body");
  if (!body) body = string_field(obj, "selftext");  // submission dumps
  r.body = body.value_or("");

  auto t = time_field(obj);
  if (!t) return std::nullopt;
  r.created_utc = *t;
  return r;
}

Corpus Corpus::from_records(const std::vector<RawRecord>& records, CorpusStats* stats_out) {
  CorpusStats stats;
  stats.n_raw = records.size();

  std::map<std::string, std::size_t, std::less<>> seen;
  std::vector<const RawRecord*> kept_posts;
  std::vector<const RawRecord*> candidate_comments;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (is_tombstone(r.id) || (r.parent_id && is_tombstone(*r.parent_id))) {
      ++stats.n_dropped_tombstone_id;
      continue;
    }
    if (!seen.emplace(r.id, i).second) {
      ++stats.n_malformed;
      continue;
    }
    if (is_tombstone(r.body)) {
      ++stats.n_dropped_tombstone_body;
      continue;
    }
    if (r.is_comment()) {
      if (text::trim(r.body).empty()) {
        ++stats.n_malformed;
        continue;
      }
      candidate_comments.push_back(&r);
    } else {
      if (text::trim(r.body).empty() && text::trim(r.title.value_or("")).empty()) {
        ++stats.n_malformed;
        continue;
      }
      kept_posts.push_back(&r);
    }
  }

  Corpus corpus;
  std::map<std::string, std::size_t, std::less<>> post_ids;
  for (const auto* r : kept_posts) {
    Post p;
    p.id = r->id;
    p.title = std::string(text::trim(r->title.value_or("")));
    p.body = std::string(text::trim(r->body));
    p.created_utc = r->created_utc;
    post_ids.emplace(p.id, 0);
    corpus.posts_.push_back(std::move(p));
  }

  std::map<std::string, const RawRecord*, std::less<>> comment_by_id;
  for (const auto* r : candidate_comments) comment_by_id.emplace(r->id, r);

  // Resolve each comment's ancestry to a kept post. A comment whose chain
  // hits a dropped or unknown record is dropped with its whole subtree.
  struct Resolution {
    std::string post_id;
    int depth = -1;
    bool ok = false;
  };
  std::map<std::string, Resolution, std::less<>> resolved;

  auto resolve = [&](const RawRecord* start) {
    std::vector<const RawRecord*> chain;  // unresolved descendants, child last
    const RawRecord* cur = start;
    Resolution base;  // resolution of the parent of chain.back()
    while (true) {
      if (auto it = resolved.find(cur->id); it != resolved.end()) {
        base = it->second;
        break;
      }
      if (std::find(chain.begin(), chain.end(), cur) != chain.end()) break;  // cycle
      chain.push_back(cur);
      std::string_view parent = *cur->parent_id;
      if (!post_ids.count(parent) && !comment_by_id.count(parent)) parent = strip_kind_prefix(parent);
      if (post_ids.count(parent)) {
        base = Resolution{std::string(parent), -1, true};
        break;
      }
      auto it = comment_by_id.find(parent);
      if (it == comment_by_id.end()) break;  // unknown or dropped parent
      cur = it->second;
    }
    // chain.back() is the topmost record; walk back down to `start`.
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      Resolution r = base;
      if (r.ok) ++r.depth;
      resolved[(*it)->id] = r;
      base = r;
    }
  };

  for (const auto* r : candidate_comments) resolve(r);

  std::map<std::string, std::vector<const RawRecord*>, std::less<>> children;  // parent id -> replies
  for (const auto* r : candidate_comments) {
    const auto& res = resolved[r->id];
    if (!res.ok) {
      ++stats.n_dropped_orphan;
      continue;
    }
    std::string parent = *r->parent_id;
    if (!post_ids.count(parent) && !comment_by_id.count(parent))
      parent = std::string(strip_kind_prefix(parent));
    children[parent].push_back(r);
    Comment c;
    c.id = r->id;
    c.post_id = res.post_id;
    c.body = std::string(text::trim(r->body));
    c.created_utc = r->created_utc;
    c.depth = res.depth;
    corpus.comments_.emplace(c.id, std::move(c));
  }
  for (auto& [_, list] : children) {
    std::sort(list.begin(), list.end(), [](const RawRecord* a, const RawRecord* b) {
      return std::tie(a->created_utc, a->id) < std::tie(b->created_utc, b->id);
    });
  }

  std::sort(corpus.posts_.begin(), corpus.posts_.end(),
            [](const Post& a, const Post& b) { return a.id < b.id; });
  for (auto& p : corpus.posts_) {
    std::vector<std::string> stack;
    auto push_children = [&](const std::string& parent) {
      auto it = children.find(parent);
      if (it == children.end()) return;
      for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit) stack.push_back((*rit)->id);
    };
    push_children(p.id);
    while (!stack.empty()) {
      std::string id = std::move(stack.back());
      stack.pop_back();
      p.comment_ids.push_back(id);
      push_children(id);
    }
  }

  stats.n_posts = corpus.posts_.size();
  stats.n_comments = corpus.comments_.size();
  corpus.stats_ = stats;
  corpus.reindex();
  if (stats_out) *stats_out = stats;
  return corpus;
}

Corpus Corpus::from_dump(const std::filesystem::path& dump, CorpusStats* stats_out) {
  std::ifstream in(dump, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dump file: " + dump.string());

  std::vector<RawRecord> records;
  std::uint64_t malformed = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (auto r = parse_record(line)) {
      records.push_back(std::move(*r));
    } else {
      ++malformed;
    }
  }
  CorpusStats stats;
  Corpus corpus = from_records(records, &stats);
  stats.n_raw += malformed;
  stats.n_malformed += malformed;
  corpus.stats_ = stats;
  if (stats_out) *stats_out = stats;
  return corpus;
}

void Corpus::reindex() {
  post_index_.clear();
  for (std::size_t i = 0; i < posts_.size(); ++i) post_index_.emplace(posts_[i].id, i);
}

const Post* Corpus::find_post(std::string_view id) const {
  auto it = post_index_.find(std::string(id));
  return it == post_index_.end() ? nullptr : &posts_[it->second];
}

const Comment* Corpus::find_comment(std::string_view id) const {
  auto it = comments_.find(std::string(id));
  return it == comments_.end() ? nullptr : &it->second;
}

const Post& Corpus::post(std::string_view id) const {
  if (const auto* p = find_post(id)) return *p;
  throw NotFound("unknown post id: " + std::string(id));
}

const Comment& Corpus::comment(std::string_view id) const {
  if (const auto* c = find_comment(id)) return *c;
  throw NotFound("unknown comment id: " + std::string(id));
}

std::vector<const Comment*> Corpus::comments_of(const Post& post) const {
  std::vector<const Comment*> out;
  out.reserve(post.comment_ids.size());
  for (const auto& cid : post.comment_ids) out.push_back(&comment(cid));
  return out;
}

std::vector<const Comment*> Corpus::all_comments() const {
  std::vector<const Comment*> out;
  out.reserve(comments_.size());
  for (const auto& p : posts_)
    for (const auto& cid : p.comment_ids) out.push_back(&comment(cid));
  return out;
}

const std::string* Corpus::body_of(std::string_view target_id) const {
  if (const auto* p = find_post(target_id)) return &p->body;
  if (const auto* c = find_comment(target_id)) return &c->body;
  return nullptr;
}

void Corpus::save(const std::filesystem::path& store_dir) const {
  std::filesystem::create_directories(store_dir);

  // Sorted "key<TAB>json" lines; std::map keeps the key order stable so
  // identical corpora produce identical bytes.
  std::map<std::string, std::string> rows;
  for (const auto& p : posts_) rows.emplace("p/" + p.id, post_to_json(p).dump());
  for (const auto& [id, c] : comments_) rows.emplace("c/" + id, comment_to_json(c).dump());

  auto tmp = store_dir / "corpus.kv.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write store: " + tmp.string());
    out << kStoreHeader << '\n';
    for (const auto& [key, value] : rows) out << key << '\t' << value << '\n';
  }
  std::filesystem::rename(tmp, store_dir / "corpus.kv");

  std::ofstream stats(store_dir / "stats.json", std::ios::binary | std::ios::trunc);
  stats << stats_to_json(stats_).dump(2) << '\n';
}

Corpus Corpus::load(const std::filesystem::path& store_dir) {
  auto path = store_dir / "corpus.kv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("no corpus store at " + store_dir.string() + " (run `comviewer ingest` first)");

  std::string line;
  if (!std::getline(in, line) || line != kStoreHeader)
    throw std::runtime_error("unrecognized corpus store header in " + path.string());

  Corpus corpus;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("corrupt store line in " + path.string());
    std::string_view key(line.data(), tab);
    json j = json::parse(line.substr(tab + 1));
    if (key.starts_with("p/")) {
      Post p;
      p.id = j.at("id").get<std::string>();
      p.title = j.at("title").get<std::string>();
      p.body = j.at("body").get<std::string>();
      p.created_utc = j.at("created_utc").get<std::int64_t>();
      p.comment_ids = j.at("comment_ids").get<std::vector<std::string>>();
      corpus.posts_.push_back(std::move(p));
    } else if (key.starts_with("c/")) {
      Comment c;
      c.id = j.at("id").get<std::string>();
      c.post_id = j.at("post_id").get<std::string>();
      c.body = j.at("body").get<std::string>();
      c.created_utc = j.at("created_utc").get<std::int64_t>();
      c.depth = j.at("depth").get<int>();
      corpus.comments_.emplace(c.id, std::move(c));
    }
  }
  std::sort(corpus.posts_.begin(), corpus.posts_.end(),
            [](const Post& a, const Post& b) { return a.id < b.id; });
  corpus.reindex();

  std::ifstream stats(store_dir / "stats.json");
  if (stats) {
    corpus.stats_ = stats_from_json(json::parse(stats));
  } else {
    corpus.stats_.n_posts = corpus.posts_.size();
    corpus.stats_.n_comments = corpus.comments_.size();
  }
  return corpus;
}

PostWithComments get_post(const Corpus& corpus, std::string_view id) {
  const Post& p = corpus.post(id);
  PostWithComments out{p, {}};
  for (const auto* c : corpus.comments_of(p)) out.comments.push_back(*c);
  return out;
}

CorpusStats ingest(const std::filesystem::path& dump, const std::filesystem::path& store_dir) {
  CorpusStats stats;
  Corpus corpus = Corpus::from_dump(dump, &stats);
  corpus.save(store_dir);
  return stats;
}

}  // namespace comviewer
