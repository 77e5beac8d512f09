#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace comviewer {

struct TopicDocument {
  std::string id;
  std::string text;
};

struct LdaConfig {
  std::size_t k = 4;
  std::optional<double> alpha;  // symmetric doc-topic prior; defaults to 50 / k
  double beta = 0.01;           // symmetric topic-word prior
  std::size_t iterations = 500;
  std::uint64_t seed = 42;

  double alpha_value() const { return alpha.value_or(50.0 / static_cast<double>(k)); }
};

/// Sufficient statistics of a collapsed Gibbs run.
struct TopicModel {
  std::size_t k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::vector<std::string> vocabulary;               // sorted
  std::vector<std::uint32_t> topic_word_counts;      // k x V, row-major
  std::vector<std::uint32_t> topic_totals;           // k

  std::size_t vocab_size() const { return vocabulary.size(); }
  std::uint32_t count(std::size_t topic, std::size_t word) const { return topic_word_counts[topic * vocab_size() + word]; }
  /// Smoothed p(word | topic).
  double word_probability(std::size_t topic, std::size_t word) const;
  /// Index of `term` in the vocabulary, or nullopt.
  std::optional<std::size_t> word_id(const std::string& term) const;

  bool operator==(const TopicModel&) const = default;
};

struct TopicAssignment {
  std::string post_id;
  std::size_t topic_id = 0;
  double proportion = 0.0;
  bool flagged = false;  // no in-vocabulary tokens; assigned topic 0 at 1/k
};

struct KeywordSet {
  std::size_t topic_id = 0;
  std::vector<std::string> keywords;

  bool operator==(const KeywordSet&) const = default;
};

/// Collapsed Gibbs sampling over the tokenized documents. Throws BadRequest
/// when fewer than k documents have tokens.
TopicModel fit_lda(const std::vector<TopicDocument>& docs, const LdaConfig& config);

/// Infers each document's topic mixture against the fitted topic-word
/// distributions and assigns the argmax topic (lowest id on ties).
std::vector<TopicAssignment> assign_topics(const TopicModel& model, const std::vector<TopicDocument>& docs);

/// Inferred mixture of one document; empty when no token is in the vocabulary.
std::vector<double> infer_mixture(const TopicModel& model, const std::vector<std::string>& tokens);

/// The m most probable terms per topic, ties broken lexicographically.
std::vector<KeywordSet> topic_keywords(const TopicModel& model, std::size_t m);

/// Mean UMass coherence over topics using the top `top_n` words of each
/// topic and document co-occurrence in `docs`.
double umass_coherence(const TopicModel& model, const std::vector<TopicDocument>& docs, std::size_t top_n = 10);

struct CoherencePoint {
  std::size_t k = 0;
  double coherence = 0.0;
};

/// Fits one model per k in [k_min, k_max] and reports its coherence. Values
/// of k that exceed the number of non-empty documents are skipped.
std::vector<CoherencePoint> sweep_k(const std::vector<TopicDocument>& docs, std::size_t k_min, std::size_t k_max,
                                    LdaConfig base);

}  // namespace comviewer
