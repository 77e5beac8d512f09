#include "comviewer/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "comviewer/error.hpp"
#include "comviewer/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace comviewer {

DocVector make_doc_vector(std::string id, std::vector<double> values) {
  DocVector v;
  v.post_id = std::move(id);
  double sq = 0.0;
  for (double x : values) sq += x * x;
  v.norm = std::sqrt(sq);
  v.embeddable = v.norm > 0.0;
  v.vector = std::move(values);
  return v;
}

double cosine(const DocVector& a, const DocVector& b) {
  if (!a.embeddable || !b.embeddable || a.vector.size() != b.vector.size()) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.vector.size(); ++i) dot += a.vector[i] * b.vector[i];
  return std::clamp(dot / (a.norm * b.norm), -1.0, 1.0);
}

// --- TfidfVectorizer --------------------------------------------------------

TfidfVectorizer TfidfVectorizer::fit(const std::vector<TextItem>& collection) {
  std::map<std::string, std::size_t> df;
  for (const auto& item : collection) {
    auto toks = text::tokenize(item.text);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& t : toks) ++df[std::move(t)];
  }
  TfidfVectorizer v;
  const auto n = static_cast<double>(collection.size());
  for (const auto& [term, count] : df) {
    v.vocabulary_.push_back(term);
    v.idf_.push_back(std::log(n / static_cast<double>(count)));
  }
  return v;
}

DocVector TfidfVectorizer::embed_one(const TextItem& item) const {
  std::map<std::string, std::size_t> counts;
  for (auto& t : text::tokenize(item.text)) ++counts[std::move(t)];
  std::vector<double> values(vocabulary_.size(), 0.0);
  for (const auto& [term, tf] : counts) {
    auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), term);
    if (it == vocabulary_.end() || *it != term) continue;
    const auto i = static_cast<std::size_t>(it - vocabulary_.begin());
    values[i] = (1.0 + std::log(static_cast<double>(tf))) * idf_[i];
  }
  return make_doc_vector(item.id, std::move(values));
}

std::vector<DocVector> TfidfVectorizer::embed(const std::vector<TextItem>& items) const {
  std::vector<DocVector> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(embed_one(item));
  return out;
}

// --- HttpEmbeddingProvider --------------------------------------------------

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url, int timeout_seconds)
    : url_(std::move(url)), timeout_seconds_(timeout_seconds) {}

HttpEmbeddingProvider HttpEmbeddingProvider::from_env() {
  const char* url = std::getenv("EMBED_URL");
  if (!url || !*url) throw EmbeddingError("external-http", "EMBED_URL is not set");
  return HttpEmbeddingProvider(url);
}

std::vector<DocVector> HttpEmbeddingProvider::embed(const std::vector<TextItem>& items) const {
  // Split "scheme://host:port/path" into the client base and request path.
  const auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) throw EmbeddingError(name(), "malformed EMBED_URL '" + url_ + "'");
  const auto path_start = url_.find('/', scheme_end + 3);
  const std::string base = url_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

  nlohmann::json request;
  request["items"] = nlohmann::json::array();
  for (const auto& item : items) request["items"].push_back({{"id", item.id}, {"text", item.text}});

  httplib::Client client(base);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  auto res = client.Post(path, request.dump(), "application/json");
  if (!res) throw EmbeddingError(name(), "unreachable at " + url_ + " (" + httplib::to_string(res.error()) + ")");
  if (res->status != 200) throw EmbeddingError(name(), "HTTP " + std::to_string(res->status) + " from " + url_);

  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.contains("items") || !body["items"].is_array())
    throw EmbeddingError(name(), "response is not {\"items\": [...]}");

  std::map<std::string, std::vector<double>> by_id;
  for (const auto& row : body["items"]) {
    if (!row.contains("id") || !row.contains("vector")) throw EmbeddingError(name(), "item missing id or vector");
    by_id[row["id"].get<std::string>()] = row["vector"].get<std::vector<double>>();
  }
  std::vector<DocVector> out;
  std::size_t dim = 0;
  for (const auto& item : items) {
    auto it = by_id.find(item.id);
    if (it == by_id.end()) throw EmbeddingError(name(), "no vector returned for id " + item.id);
    if (out.empty()) dim = it->second.size();
    if (it->second.size() != dim) throw EmbeddingError(name(), "inconsistent vector dimensions");
    out.push_back(make_doc_vector(item.id, it->second));
  }
  return out;
}

// --- pairing ----------------------------------------------------------------

std::vector<SimilarPair> similar_pairs(const std::vector<DocVector>& vectors, double threshold) {
  std::vector<const DocVector*> usable;
  for (const auto& v : vectors)
    if (v.embeddable) usable.push_back(&v);
  std::sort(usable.begin(), usable.end(), [](auto* a, auto* b) { return a->post_id < b->post_id; });

  std::vector<SimilarPair> out;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (std::size_t j = i + 1; j < usable.size(); ++j) {
      if (usable[i]->post_id == usable[j]->post_id) continue;
      const double c = cosine(*usable[i], *usable[j]);
      if (c >= threshold - kCosineSlack) out.push_back({usable[i]->post_id, usable[j]->post_id, c});
    }
  }
  return out;
}

SimilarityIndex::SimilarityIndex(std::vector<SimilarPair> pairs, std::set<std::string> known_posts)
    : pairs_(std::move(pairs)), known_(std::move(known_posts)) {
  for (const auto& p : pairs_) {
    adjacency_[p.post_a].insert(p.post_b);
    adjacency_[p.post_b].insert(p.post_a);
  }
}

std::set<std::string> SimilarityIndex::neighbors(const std::string& post_id, const std::set<std::string>& scope) const {
  if (!known_.count(post_id)) throw NotFound("unknown post id: " + post_id);
  std::set<std::string> out;
  auto it = adjacency_.find(post_id);
  if (it == adjacency_.end()) return out;
  std::set_intersection(it->second.begin(), it->second.end(), scope.begin(), scope.end(),
                        std::inserter(out, out.end()));
  return out;
}

std::string SimilarityIndex::to_csv() const {
  std::string out = "post_a,post_b,similarity\n";
  char buf[64];
  for (const auto& p : pairs_) {
    std::snprintf(buf, sizeof buf, "%.17g", p.similarity);
    out += p.post_a + "," + p.post_b + "," + buf + "\n";
  }
  return out;
}

void SimilarityIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write pairs file: " + path.string());
  out << to_csv();
}

SimilarityIndex SimilarityIndex::load(const std::filesystem::path& path, std::set<std::string> known_posts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("no pairs file at " + path.string() + " (run `comviewer pairs` first)");
  std::vector<SimilarPair> pairs;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (text::trim(line).empty()) continue;
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw std::runtime_error("corrupt pairs file " + path.string());
    pairs.push_back({line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), std::stod(line.substr(c2 + 1))});
  }
  return SimilarityIndex(std::move(pairs), std::move(known_posts));
}

std::vector<DocVector> embed_corpus(const Corpus& corpus, const EmbeddingProvider* provider) {
  std::vector<TextItem> items;
  items.reserve(corpus.post_count());
  for (const auto& p : corpus.posts()) items.push_back({p.id, p.full_text()});
  if (provider) return provider->embed(items);
  return TfidfVectorizer::fit(items).embed(items);
}

}  // namespace comviewer
