#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "comviewer/corpus.hpp"
#include "comviewer/topics.hpp"

namespace fixtures {

/// Six records: two posts, three comments on p1 (one "[deleted]" body) and
/// a reply whose parent id is "[removed]".
inline const char* kSixRecords =
    R"({"id":"p1","title":"Exam stress","body":"My exam is tomorrow and I cannot sleep","created_utc":100})" "\n"
    R"({"id":"p2","title":"Work","body":"Deadlines everywhere","created_utc":200})" "\n"
    R"({"id":"c1","parent_id":"t3_p1","body":"Try breathing slowly","created_utc":110})" "\n"
    R"({"id":"c2","parent_id":"t1_c1","body":"Thanks, that helps","created_utc":120})" "\n"
    R"({"id":"c3","parent_id":"t3_p1","body":"[deleted]","created_utc":130})" "\n"
    R"({"id":"c4","parent_id":"[removed]","body":"lost reply","created_utc":140})" "\n";

/// A fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("comviewer-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// 40 documents over two disjoint vocabularies; truth[i] is the source.
inline std::vector<comviewer::TopicDocument> two_vocabularies(std::vector<std::size_t>* truth, std::uint64_t seed = 3) {
  const std::vector<std::string> a{"exam", "grades", "professor", "lecture", "semester", "homework", "quiz", "study"};
  const std::vector<std::string> b{"insomnia", "pillow", "melatonin", "nightmare", "bedtime", "snore", "nap", "dream"};
  std::mt19937_64 rng(seed);
  std::vector<comviewer::TopicDocument> docs;
  for (std::size_t i = 0; i < 40; ++i) {
    const auto& vocab = i % 2 ? b : a;
    std::string text;
    for (int w = 0; w < 12; ++w) text += vocab[rng() % vocab.size()] + " ";
    docs.push_back({"d" + std::to_string(100 + i), text});
    if (truth) truth->push_back(i % 2);
  }
  return docs;
}

}  // namespace fixtures
