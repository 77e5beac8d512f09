#include "comviewer/topics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "comviewer/error.hpp"
#include "comviewer/text.hpp"

namespace comviewer {
namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

constexpr std::size_t kInferenceIterations = 50;

}  // namespace

double TopicModel::word_probability(std::size_t topic, std::size_t word) const {
  return (static_cast<double>(count(topic, word)) + beta) /
         (static_cast<double>(topic_totals[topic]) + static_cast<double>(vocab_size()) * beta);
}

std::optional<std::size_t> TopicModel::word_id(const std::string& term) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
  if (it == vocabulary.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - vocabulary.begin());
}

TopicModel fit_lda(const std::vector<TopicDocument>& docs, const LdaConfig& config) {
  if (config.k == 0) throw BadRequest("topic count k must be at least 1");

  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(docs.size());
  std::set<std::string> vocab_set;
  std::size_t non_empty = 0;
  for (const auto& d : docs) {
    tokenized.push_back(text::tokenize(d.text));
    if (!tokenized.back().empty()) ++non_empty;
    vocab_set.insert(tokenized.back().begin(), tokenized.back().end());
  }
  if (non_empty < config.k)
    throw BadRequest("only " + std::to_string(non_empty) + " non-empty documents for k=" + std::to_string(config.k) +
                     "; lower k");

  TopicModel model;
  model.k = config.k;
  model.alpha = config.alpha_value();
  model.beta = config.beta;
  model.seed = config.seed;
  model.iterations = config.iterations;
  model.vocabulary.assign(vocab_set.begin(), vocab_set.end());

  const std::size_t K = model.k;
  const std::size_t V = model.vocab_size();
  model.topic_word_counts.assign(K * V, 0);
  model.topic_totals.assign(K, 0);

  std::vector<std::vector<std::uint32_t>> words(tokenized.size());
  std::vector<std::vector<std::uint32_t>> z(tokenized.size());
  std::vector<std::uint32_t> doc_topic(tokenized.size() * K, 0);

  std::mt19937_64 rng(config.seed);
  for (std::size_t d = 0; d < tokenized.size(); ++d) {
    for (const auto& tok : tokenized[d]) {
      const auto w = static_cast<std::uint32_t>(*model.word_id(tok));
      const auto t = static_cast<std::uint32_t>(rng() % K);
      words[d].push_back(w);
      z[d].push_back(t);
      ++doc_topic[d * K + t];
      ++model.topic_word_counts[t * V + w];
      ++model.topic_totals[t];
    }
  }

  const double alpha = model.alpha;
  const double beta = model.beta;
  const double v_beta = static_cast<double>(V) * beta;
  std::vector<double> cumulative(K);
  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    for (std::size_t d = 0; d < words.size(); ++d) {
      auto* nd = &doc_topic[d * K];
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const auto w = words[d][i];
        const auto old = z[d][i];
        --nd[old];
        --model.topic_word_counts[old * V + w];
        --model.topic_totals[old];

        double total = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          total += (nd[t] + alpha) * (model.topic_word_counts[t * V + w] + beta) / (model.topic_totals[t] + v_beta);
          cumulative[t] = total;
        }
        const double u = uniform01(rng) * total;
        std::size_t t = 0;
        while (t + 1 < K && cumulative[t] <= u) ++t;

        z[d][i] = static_cast<std::uint32_t>(t);
        ++nd[t];
        ++model.topic_word_counts[t * V + w];
        ++model.topic_totals[t];
      }
    }
  }
  return model;
}

std::vector<double> infer_mixture(const TopicModel& model, const std::vector<std::string>& tokens) {
  std::vector<std::size_t> ids;
  for (const auto& tok : tokens)
    if (auto w = model.word_id(tok)) ids.push_back(*w);
  if (ids.empty()) return {};

  const std::size_t K = model.k;
  const double n = static_cast<double>(ids.size());
  std::vector<double> theta(K, 1.0 / static_cast<double>(K));
  std::vector<double> expected(K);
  std::vector<double> resp(K);
  // Fixed-point fold-in: expected topic counts under the current mixture,
  // smoothed by alpha. Deterministic, unlike a fold-in Gibbs pass.
  for (std::size_t iter = 0; iter < kInferenceIterations; ++iter) {
    std::fill(expected.begin(), expected.end(), 0.0);
    for (auto w : ids) {
      double norm = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        resp[t] = theta[t] * model.word_probability(t, w);
        norm += resp[t];
      }
      for (std::size_t t = 0; t < K; ++t) expected[t] += resp[t] / norm;
    }
    for (std::size_t t = 0; t < K; ++t)
      theta[t] = (expected[t] + model.alpha) / (n + static_cast<double>(K) * model.alpha);
  }
  return theta;
}

std::vector<TopicAssignment> assign_topics(const TopicModel& model, const std::vector<TopicDocument>& docs) {
  std::vector<TopicAssignment> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    TopicAssignment a;
    a.post_id = d.id;
    auto theta = infer_mixture(model, text::tokenize(d.text));
    if (theta.empty()) {
      a.topic_id = 0;
      a.proportion = 1.0 / static_cast<double>(model.k);
      a.flagged = true;
    } else {
      auto best = std::max_element(theta.begin(), theta.end());  // first max on ties
      a.topic_id = static_cast<std::size_t>(best - theta.begin());
      a.proportion = *best;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<KeywordSet> topic_keywords(const TopicModel& model, std::size_t m) {
  std::vector<KeywordSet> out;
  const std::size_t V = model.vocab_size();
  for (std::size_t t = 0; t < model.k; ++t) {
    std::vector<std::size_t> order(V);
    std::iota(order.begin(), order.end(), 0);
    // Counts share a denominator within a topic, so ordering by count is
    // ordering by probability without rounding noise. The vocabulary is
    // sorted, so the index tiebreak is lexicographic.
    auto better = [&](std::size_t a, std::size_t b) {
      if (model.count(t, a) != model.count(t, b)) return model.count(t, a) > model.count(t, b);
      return a < b;
    };
    const std::size_t take = std::min(m, V);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
    KeywordSet ks{t, {}};
    for (std::size_t i = 0; i < take; ++i) ks.keywords.push_back(model.vocabulary[order[i]]);
    out.push_back(std::move(ks));
  }
  return out;
}

double umass_coherence(const TopicModel& model, const std::vector<TopicDocument>& docs, std::size_t top_n) {
  std::vector<std::set<std::string>> doc_terms;
  doc_terms.reserve(docs.size());
  for (const auto& d : docs) {
    auto toks = text::tokenize(d.text);
    doc_terms.emplace_back(toks.begin(), toks.end());
  }
  auto doc_freq = [&](const std::string& a) {
    return static_cast<double>(std::count_if(doc_terms.begin(), doc_terms.end(), [&](const auto& s) { return s.count(a) > 0; }));
  };
  auto co_freq = [&](const std::string& a, const std::string& b) {
    return static_cast<double>(std::count_if(doc_terms.begin(), doc_terms.end(),
                                             [&](const auto& s) { return s.count(a) > 0 && s.count(b) > 0; }));
  };

  const auto keywords = topic_keywords(model, top_n);
  if (keywords.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ks : keywords) {
    double c = 0.0;
    for (std::size_t m = 1; m < ks.keywords.size(); ++m) {
      for (std::size_t l = 0; l < m; ++l) {
        const double dl = doc_freq(ks.keywords[l]);
        if (dl > 0) c += std::log((co_freq(ks.keywords[m], ks.keywords[l]) + 1.0) / dl);
      }
    }
    sum += c;
  }
  return sum / static_cast<double>(keywords.size());
}

std::vector<CoherencePoint> sweep_k(const std::vector<TopicDocument>& docs, std::size_t k_min, std::size_t k_max,
                                    LdaConfig base) {
  std::size_t non_empty = 0;
  for (const auto& d : docs)
    if (!text::tokenize(d.text).empty()) ++non_empty;

  std::vector<CoherencePoint> out;
  for (std::size_t k = std::max<std::size_t>(k_min, 1); k <= k_max && k <= non_empty; ++k) {
    LdaConfig cfg = base;
    cfg.k = k;
    auto model = fit_lda(docs, cfg);
    out.push_back({k, umass_coherence(model, docs)});
  }
  return out;
}

}  // namespace comviewer
