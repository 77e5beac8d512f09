#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "comviewer/corpus.hpp"

namespace comviewer {

struct DocVector {
  std::string post_id;
  std::vector<double> vector;
  double norm = 0.0;
  bool embeddable = false;  // false for zero vectors; such docs never pair
};

struct SimilarPair {
  std::string post_a;  // post_a < post_b
  std::string post_b;
  double similarity = 0.0;

  bool operator==(const SimilarPair&) const = default;
};

struct TextItem {
  std::string id;
  std::string text;
};

/// Raised when an embedding provider cannot produce vectors.
class EmbeddingError : public std::runtime_error {
 public:
  EmbeddingError(std::string provider, const std::string& message)
      : std::runtime_error("embedding provider '" + provider + "': " + message), provider_(std::move(provider)) {}
  const std::string& provider() const { return provider_; }

 private:
  std::string provider_;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::vector<DocVector> embed(const std::vector<TextItem>& items) const = 0;
};

/// Log-tf * idf vectors over the shared index tokenizer, fitted to a
/// reference collection. Dimension = fitted vocabulary size.
class TfidfVectorizer final : public EmbeddingProvider {
 public:
  static TfidfVectorizer fit(const std::vector<TextItem>& collection);

  std::string name() const override { return "builtin-tfidf-vector"; }
  std::vector<DocVector> embed(const std::vector<TextItem>& items) const override;
  DocVector embed_one(const TextItem& item) const;

  std::size_t dimension() const { return vocabulary_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }

 private:
  std::vector<std::string> vocabulary_;  // sorted
  std::vector<double> idf_;
};

/// Posts {"items": [{"id", "text"}]} to `url` and expects
/// {"items": [{"id", "vector": [...]}]} back, in any order.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(std::string url, int timeout_seconds = 30);
  /// Reads EMBED_URL; throws EmbeddingError when unset.
  static HttpEmbeddingProvider from_env();

  std::string name() const override { return "external-http"; }
  std::vector<DocVector> embed(const std::vector<TextItem>& items) const override;

 private:
  std::string url_;
  int timeout_seconds_;
};

/// Finalizes `norm` and `embeddable` from the raw vector.
DocVector make_doc_vector(std::string id, std::vector<double> values);

double cosine(const DocVector& a, const DocVector& b);

/// Comparison slack when testing cosine >= threshold, so that a vector
/// compared with itself reaches 1.0.
inline constexpr double kCosineSlack = 1e-12;

/// All pairs with cosine >= threshold among embeddable vectors, sorted by
/// (post_a, post_b). Brute force over every pair.
std::vector<SimilarPair> similar_pairs(const std::vector<DocVector>& vectors, double threshold);

/// Pair set plus the universe of known post ids.
class SimilarityIndex {
 public:
  SimilarityIndex() = default;
  SimilarityIndex(std::vector<SimilarPair> pairs, std::set<std::string> known_posts);

  /// Similar posts of `post_id` restricted to `scope`. Throws NotFound for
  /// ids outside the known universe.
  std::set<std::string> neighbors(const std::string& post_id, const std::set<std::string>& scope) const;

  const std::vector<SimilarPair>& pairs() const { return pairs_; }

  std::string to_csv() const;
  void save(const std::filesystem::path& path) const;
  static SimilarityIndex load(const std::filesystem::path& path, std::set<std::string> known_posts);

 private:
  std::vector<SimilarPair> pairs_;
  std::set<std::string> known_;
  std::map<std::string, std::set<std::string>, std::less<>> adjacency_;
};

/// Embeds every post of the corpus (title + body) with the builtin
/// vectorizer fitted to the corpus itself.
std::vector<DocVector> embed_corpus(const Corpus& corpus, const EmbeddingProvider* provider = nullptr);

}  // namespace comviewer
