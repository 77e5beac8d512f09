#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "comviewer/config.hpp"
#include "comviewer/corpus.hpp"
#include "comviewer/labeling.hpp"
#include "comviewer/llm.hpp"
#include "comviewer/search.hpp"
#include "comviewer/similarity.hpp"

namespace comviewer {

/// Immutable serving inputs.
struct ServerData {
  Corpus corpus;
  InvertedIndex index;
  LabelTable labels;
  SimilarityIndex similar;
};

/// A serving input is missing; the message names the command that makes it.
class MissingPrerequisite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads corpus.kv, labels.csv and pairs.csv from `store_dir` and index.bin
/// from `index_dir`. Throws MissingPrerequisite when a file is absent.
ServerData load_server_data(const std::filesystem::path& store_dir, const std::filesystem::path& index_dir);

struct ServerOptions {
  ServerConfig config;
  std::filesystem::path sessions_dir;  // empty: sessions live in memory only
  std::size_t workers = 2;             // LLM job threads
  std::filesystem::path static_dir;    // optional web client assets
};

/// JSON API over HTTP. Routes are listed in README.md; payload schemas
/// live in schemas/.
class ApiServer {
 public:
  ApiServer(ServerData data, ServerOptions options, std::unique_ptr<llm::ChatProvider> provider);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
  /// Throws std::runtime_error when binding fails.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void run();
  void stop();
  /// Blocks until queued LLM jobs have finished.
  void drain();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace comviewer
