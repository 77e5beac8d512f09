#include <benchmark/benchmark.h>

#include <random>

#include "comviewer/comviewer.hpp"
#include "fixture.hpp"

using namespace comviewer;

namespace {

const Corpus& desk(std::size_t posts) {
  static std::map<std::size_t, Corpus> cache;
  auto it = cache.find(posts);
  if (it == cache.end()) {
    const auto path = std::filesystem::temp_directory_path() / ("comviewer-bench-" + std::to_string(posts) + ".jsonl");
    fixture::write_desk_dump(path, {posts, 7});
    it = cache.emplace(posts, Corpus::from_dump(path)).first;
  }
  return it->second;
}

void BM_Search(benchmark::State& state) {
  const auto index = InvertedIndex::build(desk(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(index.search("exam sleep panic", SearchConfig{150}));
}
BENCHMARK(BM_Search)->Arg(200)->Arg(2000);

void BM_IndexBuild(benchmark::State& state) {
  const auto& corpus = desk(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(InvertedIndex::build(corpus));
}
BENCHMARK(BM_IndexBuild)->Arg(200)->Arg(2000);

void BM_Lda(benchmark::State& state) {
  std::vector<TopicDocument> docs;
  for (const auto& p : desk(200).posts()) docs.push_back({p.id, p.full_text()});
  LdaConfig cfg;
  cfg.iterations = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_lda(docs, cfg));
}
BENCHMARK(BM_Lda)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Pack(benchmark::State& state) {
  std::mt19937_64 rng(1);
  CircleNode root;
  for (int t = 0; t < 6; ++t) {
    CircleNode topic;
    topic.level = NodeLevel::topic;
    topic.ref_id = std::to_string(t);
    for (int p = 0; p < state.range(0) / 6; ++p) {
      CircleNode post;
      post.level = NodeLevel::post;
      post.ref_id = topic.ref_id + "-" + std::to_string(p);
      post.weight = rng() % 12;
      for (std::size_t c = 0; c < post.weight; ++c) {
        CircleNode cm;
        cm.level = NodeLevel::comment;
        cm.ref_id = post.ref_id + "-" + std::to_string(c);
        cm.weight = 1;
        post.children.push_back(cm);
      }
      topic.children.push_back(post);
    }
    topic.weight = topic.children.size();
    root.children.push_back(topic);
  }
  for (auto _ : state) benchmark::DoNotOptimize(pack(root));
}
BENCHMARK(BM_Pack)->Arg(60)->Arg(150)->Arg(600);

void BM_Pairs(benchmark::State& state) {
  const auto& corpus = desk(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(similar_pairs(embed_corpus(corpus), 0.6));
}
BENCHMARK(BM_Pairs)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
