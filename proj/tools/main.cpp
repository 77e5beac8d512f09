// comviewer: operator CLI over the core library.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "comviewer/comviewer.hpp"
#include "fixture.hpp"

namespace fs = std::filesystem;
using namespace comviewer;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void need_store(const fs::path& store) {
  if (!fs::exists(store / "corpus.kv"))
    throw MissingPrerequisite("no corpus store at " + store.string() + "; run `comviewer ingest --dump <file> --out " +
                              store.string() + "` first");
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto k = std::stoul(s);
      return {k, k};
    }
    return {std::stoul(s.substr(0, dots)), std::stoul(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw std::runtime_error("bad k range '" + s + "'; expected e.g. 1..10");
  }
}

ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comviewer: explore support-seeking discussions"};
  app.require_subcommand(1);

  fs::path dump, out, store, index_dir, labels_file, lexicon_file, config_file, port_file, sessions_dir, static_dir;
  std::string provider = "heuristic", embed = "builtin", query, k_range = "1..10", session_id;
  double threshold = 0.6;
  int port = 8080;
  bool port_set = false;
  std::size_t fixture_posts = 200, workers = 2;
  std::uint64_t fixture_seed = 7;

  auto* ingest_cmd = app.add_subcommand("ingest", "Clean a newline-delimited dump into a corpus store");
  ingest_cmd->add_option("--dump", dump, "Dump file (one JSON record per line)")->required();
  ingest_cmd->add_option("--out", out, "Store directory")->required();

  auto* index_cmd = app.add_subcommand("index", "Build the search index");
  index_cmd->add_option("--store", store)->required();
  index_cmd->add_option("--out", out, "Index directory")->required();

  auto* label_cmd = app.add_subcommand("label", "Label posts and comments; writes <store>/labels.csv");
  label_cmd->add_option("--store", store)->required();
  label_cmd->add_option("--provider", provider, "heuristic or file")->check(CLI::IsMember({"heuristic", "file"}));
  label_cmd->add_option("--labels", labels_file, "CSV id,direction,kind,level (provider=file)");
  label_cmd->add_option("--lexicon", lexicon_file, "Marker lexicon (default: shipped lexicon)");

  auto* pairs_cmd = app.add_subcommand("pairs", "Compute similar post pairs; writes <store>/pairs.csv");
  pairs_cmd->add_option("--store", store)->required();
  pairs_cmd->add_option("--threshold", threshold, "Cosine threshold")->check(CLI::Range(-1.0, 1.0));
  pairs_cmd->add_option("--provider", embed, "builtin or http (EMBED_URL)")->check(CLI::IsMember({"builtin", "http"}));

  auto* search_cmd = app.add_subcommand("search", "Run a query against the index");
  search_cmd->add_option("--index", index_dir)->required();
  search_cmd->add_option("--query", query)->required();

  auto* sweep_cmd = app.add_subcommand("sweep-k", "Topic coherence for a range of k on one query's results");
  sweep_cmd->add_option("--store", store)->required();
  sweep_cmd->add_option("--index", index_dir, "Index directory (default: <store>/index)");
  sweep_cmd->add_option("--query", query)->required();
  sweep_cmd->add_option("--k-range", k_range, "e.g. 1..10");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API");
  serve_cmd->add_option("--store", store)->required();
  serve_cmd->add_option("--index", index_dir)->required();
  auto* port_opt = serve_cmd->add_option("--port", port, "0 picks a free port");
  serve_cmd->add_option("--config", config_file, "Config file (docs/config.md)");
  serve_cmd->add_option("--port-file", port_file, "Write the bound port here once listening");
  serve_cmd->add_option("--sessions", sessions_dir, "Session directory (default: <store>/sessions)");
  serve_cmd->add_option("--static", static_dir, "Web client assets");
  serve_cmd->add_option("--workers", workers, "LLM job threads");

  auto* session_cmd = app.add_subcommand("session", "Export or import a session document");
  session_cmd->require_subcommand(1);
  auto* export_cmd = session_cmd->add_subcommand("export");
  export_cmd->add_option("--sessions", sessions_dir)->required();
  export_cmd->add_option("--id", session_id)->required();
  export_cmd->add_option("--out", out, "Output file (default: stdout)");
  auto* import_cmd = session_cmd->add_subcommand("import");
  import_cmd->add_option("--sessions", sessions_dir)->required();
  import_cmd->add_option("--file", dump, "Session document")->required();

  auto* fixture_cmd = app.add_subcommand("fixture", "Write the synthetic desk dump");
  fixture_cmd->add_option("--out", out)->required();
  fixture_cmd->add_option("--posts", fixture_posts);
  fixture_cmd->add_option("--seed", fixture_seed);

  CLI11_PARSE(app, argc, argv);
  port_set = port_opt->count() > 0;

  try {
    if (*ingest_cmd) {
      const auto stats = ingest(dump, out);
      std::printf("raw %llu posts %llu comments %llu dropped: tombstone-id %llu tombstone-body %llu orphan %llu "
                  "malformed %llu\n",
                  (unsigned long long)stats.n_raw, (unsigned long long)stats.n_posts,
                  (unsigned long long)stats.n_comments, (unsigned long long)stats.n_dropped_tombstone_id,
                  (unsigned long long)stats.n_dropped_tombstone_body, (unsigned long long)stats.n_dropped_orphan,
                  (unsigned long long)stats.n_malformed);
    } else if (*index_cmd) {
      need_store(store);
      const auto index = InvertedIndex::build(Corpus::load(store));
      index.save(out);
      std::printf("indexed %zu posts, %zu terms\n", index.doc_count(), index.term_count());
    } else if (*label_cmd) {
      need_store(store);
      const Corpus corpus = Corpus::load(store);
      auto heuristic = std::make_shared<HeuristicProvider>(lexicon_file.empty() ? Lexicon::load_default()
                                                                                : Lexicon::load(lexicon_file));
      std::shared_ptr<const LabelProvider> chosen = heuristic;
      if (provider == "file") {
        if (labels_file.empty()) throw std::runtime_error("--provider file needs --labels <csv>");
        chosen = import_labels(labels_file, heuristic);
      }
      const auto table = label_corpus(corpus, *chosen);
      table.save_csv(store / "labels.csv");
      std::printf("labeled %zu rows with %s\n", table.size(), chosen->name().c_str());
    } else if (*pairs_cmd) {
      need_store(store);
      const Corpus corpus = Corpus::load(store);
      std::unique_ptr<EmbeddingProvider> external;
      if (embed == "http") external = std::make_unique<HttpEmbeddingProvider>(HttpEmbeddingProvider::from_env());
      const auto vectors = embed_corpus(corpus, external.get());
      std::set<std::string> known;
      for (const auto& p : corpus.posts()) known.insert(p.id);
      SimilarityIndex similar(similar_pairs(vectors, threshold), std::move(known));
      similar.save(store / "pairs.csv");
      std::printf("%zu pairs at threshold %g\n", similar.pairs().size(), threshold);
    } else if (*search_cmd) {
      const auto index = InvertedIndex::load(index_dir);
      const auto response = index.search(query);
      if (response.status == SearchStatus::empty_query) std::printf("empty query\n");
      for (const auto& r : response.results) std::printf("%zu\t%s\t%.6f\n", r.rank, r.post_id.c_str(), r.score);
    } else if (*sweep_cmd) {
      need_store(store);
      if (index_dir.empty()) index_dir = store / "index";
      const Corpus corpus = Corpus::load(store);
      const auto index = InvertedIndex::load(index_dir);
      const auto response = index.search(query);
      if (response.results.empty()) throw std::runtime_error("query '" + query + "' matched no posts");
      std::vector<TopicDocument> docs;
      for (const auto& r : response.results) docs.push_back({r.post_id, corpus.post(r.post_id).full_text()});
      const auto [kmin, kmax] = parse_range(k_range);
      std::printf("k\tumass\n");
      for (const auto& pt : sweep_k(docs, kmin, kmax, LdaConfig{})) std::printf("%zu\t%.6f\n", pt.k, pt.coherence);
    } else if (*serve_cmd) {
      ServerOptions options;
      if (!config_file.empty()) options.config = ServerConfig::load(config_file);
      if (port_set) options.config.port = port;
      options.sessions_dir = sessions_dir.empty() ? store / "sessions" : sessions_dir;
      options.static_dir = static_dir;
      options.workers = workers;
      ServerData data = load_server_data(store, index_dir);
      ApiServer server(std::move(data), options, llm::make_provider(llm::ProviderConfig::from_env()));
      const int bound = server.bind("127.0.0.1", options.config.port);
      if (!port_file.empty()) {
        const fs::path tmp = port_file.string() + ".tmp";
        std::ofstream(tmp) << bound << "\n";
        fs::rename(tmp, port_file);
      }
      std::fprintf(stderr, "listening on http://127.0.0.1:%d\n", bound);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.run();
      g_server = nullptr;
    } else if (*export_cmd) {
      SessionStore sessions(sessions_dir);
      auto s = sessions.get(session_id);
      std::string doc;
      {
        std::lock_guard lock(s->mutex);
        doc = export_session(*s);
      }
      if (out.empty()) {
        std::cout << doc << "\n";
      } else {
        std::ofstream(out, std::ios::binary) << doc;
      }
    } else if (*import_cmd) {
      SessionStore sessions(sessions_dir);
      auto s = sessions.import_document(read_file(dump));
      std::printf("%s\n", s->id.c_str());
    } else if (*fixture_cmd) {
      fixture::write_desk_dump(out, {fixture_posts, fixture_seed});
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "comviewer: %s\n", e.what());
    return 1;
  }
  return 0;
}
