#include "comviewer/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>

#include "comviewer/text.hpp"

namespace comviewer {
namespace {

constexpr char kMagic[4] = {'C', 'V', 'I', 'X'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string str() {
    auto n = u32();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("index file truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

InvertedIndex InvertedIndex::build(const Corpus& corpus) {
  std::vector<std::pair<std::string, std::string>> docs;
  docs.reserve(corpus.post_count());
  for (const auto& p : corpus.posts()) docs.emplace_back(p.id, p.full_text());
  return build(docs);
}

InvertedIndex InvertedIndex::build(const std::vector<std::pair<std::string, std::string>>& input) {
  std::vector<const std::pair<std::string, std::string>*> docs;
  for (const auto& d : input) docs.push_back(&d);
  std::sort(docs.begin(), docs.end(), [](auto* a, auto* b) { return a->first < b->first; });

  InvertedIndex idx;
  for (std::uint32_t doc = 0; doc < docs.size(); ++doc) {
    idx.doc_ids_.push_back(docs[doc]->first);
    std::map<std::string, std::uint32_t> counts;
    for (auto& tok : text::tokenize(docs[doc]->second)) ++counts[std::move(tok)];
    for (auto& [term, tf] : counts) {
      auto& list = idx.postings_[term];
      list.term = term;
      list.entries.push_back({doc, tf});
    }
  }
  return idx;
}

const PostingList* InvertedIndex::postings(std::string_view term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

double InvertedIndex::idf(std::string_view term) const {
  const auto* list = postings(term);
  if (!list || list->entries.empty()) return 0.0;
  return std::log(static_cast<double>(doc_ids_.size()) / static_cast<double>(list->entries.size()));
}

SearchResponse InvertedIndex::search(std::string_view query, const SearchConfig& config) const {
  SearchResponse response;
  auto tokens = text::tokenize(query);
  if (tokens.empty()) {
    response.status = SearchStatus::empty_query;
    return response;
  }
  // Distinct terms in lexicographic order so the floating-point sum does
  // not depend on how the user ordered the query.
  std::set<std::string> terms(std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end()));

  std::vector<double> scores(doc_ids_.size(), 0.0);
  std::vector<bool> matched(doc_ids_.size(), false);
  for (const auto& term : terms) {
    const auto* list = postings(term);
    if (!list) continue;
    const double w = idf(term);
    for (const auto& e : list->entries) {
      scores[e.doc] += (1.0 + std::log(static_cast<double>(e.tf))) * w;
      matched[e.doc] = true;
    }
  }

  std::vector<std::uint32_t> hits;
  for (std::uint32_t d = 0; d < matched.size(); ++d)
    if (matched[d]) hits.push_back(d);
  // doc numbers follow post id order, so comparing them breaks ties by id.
  auto by_score = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const std::size_t keep = std::min(hits.size(), std::max<std::size_t>(config.n_top, 1));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), by_score);
  hits.resize(keep);

  response.results.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i)
    response.results.push_back({doc_ids_[hits[i]], scores[hits[i]], i + 1});
  return response;
}

std::string InvertedIndex::serialize() const {
  std::string out;
  out.append(kMagic, sizeof kMagic);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(doc_ids_.size()));
  for (const auto& id : doc_ids_) put_str(out, id);
  put_u32(out, static_cast<std::uint32_t>(postings_.size()));
  for (const auto& [term, list] : postings_) {
    put_str(out, term);
    put_u32(out, static_cast<std::uint32_t>(list.entries.size()));
    for (const auto& e : list.entries) {
      put_u32(out, e.doc);
      put_u32(out, e.tf);
    }
  }
  return out;
}

InvertedIndex InvertedIndex::deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (std::memcmp(r.raw(4).data(), kMagic, 4) != 0) throw std::runtime_error("not a comviewer index file");
  if (auto v = r.u32(); v != kFormatVersion)
    throw std::runtime_error("unsupported index format version " + std::to_string(v));

  InvertedIndex idx;
  const auto n_docs = r.u32();
  idx.doc_ids_.reserve(n_docs);
  for (std::uint32_t i = 0; i < n_docs; ++i) idx.doc_ids_.push_back(r.str());
  const auto n_terms = r.u32();
  for (std::uint32_t i = 0; i < n_terms; ++i) {
    PostingList list;
    list.term = r.str();
    const auto n = r.u32();
    list.entries.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
      Posting p;
      p.doc = r.u32();
      p.tf = r.u32();
      if (p.doc >= n_docs || p.tf == 0) throw std::runtime_error("corrupt posting in index file");
      list.entries.push_back(p);
    }
    auto key = list.term;
    idx.postings_.emplace(std::move(key), std::move(list));
  }
  if (!r.done()) throw std::runtime_error("trailing bytes in index file");
  return idx;
}

void InvertedIndex::save(const std::filesystem::path& index_dir) const {
  std::filesystem::create_directories(index_dir);
  std::ofstream out(index_dir / "index.bin", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write index in " + index_dir.string());
  const auto bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& index_dir) {
  std::ifstream in(index_dir / "index.bin", std::ios::binary);
  if (!in) throw std::runtime_error("no index at " + index_dir.string() + " (run `comviewer index` first)");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace comviewer
