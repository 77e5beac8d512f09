#include "comviewer/server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "comviewer/error.hpp"
#include "comviewer/explorer.hpp"
#include "comviewer/session.hpp"
#include "comviewer/text.hpp"
#include "comviewer/topics.hpp"
#include "httplib.h"
#include "json_io.hpp"

namespace comviewer {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::filesystem::path require(const std::filesystem::path& p, const std::string& hint) {
  if (!std::filesystem::exists(p)) throw MissingPrerequisite(p.string() + " not found; run `" + hint + "` first");
  return p;
}

}  // namespace

ServerData load_server_data(const std::filesystem::path& store_dir, const std::filesystem::path& index_dir) {
  require(store_dir / "corpus.kv", "comviewer ingest --dump <file> --out " + store_dir.string());
  require(index_dir / "index.bin", "comviewer index --store " + store_dir.string() + " --out " + index_dir.string());
  require(store_dir / "labels.csv", "comviewer label --store " + store_dir.string());
  require(store_dir / "pairs.csv", "comviewer pairs --store " + store_dir.string());
  ServerData data;
  data.corpus = Corpus::load(store_dir);
  data.index = InvertedIndex::load(index_dir);
  data.labels = LabelTable::load_csv(store_dir / "labels.csv");
  std::set<std::string> known;
  for (const auto& p : data.corpus.posts()) known.insert(p.id);
  data.similar = SimilarityIndex::load(store_dir / "pairs.csv", std::move(known));
  return data;
}

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::bad_request: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::stale_view: return 409;
    case ErrorCode::upstream_llm: return 502;
    case ErrorCode::internal: return 500;
  }
  return 500;
}

json error_json(ErrorCode code, const std::string& message, const std::string& detail) {
  return json{{"code", std::string(to_string(code))}, {"message", message}, {"detail", detail}};
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw BadRequest("request body is not a JSON object");
  return body;
}

template <typename T>
T field(const json& body, const char* name) {
  if (!body.contains(name)) throw BadRequest(std::string("missing field '") + name + "'");
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw BadRequest(std::string("field '") + name + "' has the wrong type");
  }
}

std::string session_param(const httplib::Request& req, const json& body) {
  if (body.contains("session") && body["session"].is_string()) return body["session"].get<std::string>();
  if (req.has_param("session")) return req.get_param_value("session");
  throw BadRequest("missing session id");
}

json labels_of(const std::optional<LabelPair>& labels) {
  return labels ? json_io::labels_json(*labels) : json(nullptr);
}

json histogram_json(const SupportHistogram& h) {
  json out{{"direction", std::string(to_string(h.direction))}};
  for (auto kind : {SupportKind::emotional, SupportKind::informational}) {
    json bars = json::object();
    for (auto level : {Level::high, Level::medium, Level::low})
      bars[std::string(to_string(level))] = h.count(kind, level);
    out[std::string(to_string(kind))] = bars;
  }
  return out;
}

json filter_json(const SupportFilter& f) {
  json selections = json::array();
  for (const auto& s : f.selections)
    selections.push_back({{"direction", std::string(to_string(s.direction))},
                          {"kind", std::string(to_string(s.kind))},
                          {"level", std::string(to_string(s.level))}});
  return json{{"selections", selections}};
}

SupportFilter filter_from(const json& body) {
  if (!body.contains("selections") || !body["selections"].is_array())
    throw BadRequest("missing field 'selections'");
  SupportFilter f;
  for (const auto& s : body["selections"]) {
    if (!s.is_object()) throw BadRequest("selection must be an object");
    auto d = parse_direction(s.value("direction", std::string{}));
    auto k = parse_kind(s.value("kind", std::string{}));
    auto l = parse_level(s.value("level", std::string{}));
    if (!d || !k || !l) throw BadRequest("selection needs direction, kind and level", s.dump());
    f.select(*d, *k, *l);
  }
  return f;
}

struct Job {
  std::string id;
  std::string session;
  std::string kind;
  std::string status = "queued";  // queued, running, succeeded, failed
  json result = nullptr;
  json error = nullptr;
};

json job_json(const Job& j) {
  return json{{"schema_version", kSchemaVersion}, {"id", j.id},       {"kind", j.kind},
              {"status", j.status},              {"result", j.result}, {"error", j.error}};
}

}  // namespace

struct ApiServer::Impl {
  Impl(ServerData d, ServerOptions o, std::unique_ptr<llm::ChatProvider> p)
      : data(std::move(d)),
        options(std::move(o)),
        provider(std::move(p)),
        sessions(options.sessions_dir, Palette(options.config.palette)) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, options.workers); ++i)
      workers.emplace_back([this] { work(); });
    routes();
  }

  ~Impl() {
    {
      std::lock_guard lock(queue_mutex);
      shutting_down = true;
    }
    queue_cv.notify_all();
    for (auto& t : workers) t.join();
  }

  ServerData data;
  ServerOptions options;
  std::unique_ptr<llm::ChatProvider> provider;
  SessionStore sessions;
  httplib::Server http;

  // Job queue.
  std::mutex queue_mutex;
  std::condition_variable queue_cv;
  std::condition_variable idle_cv;
  std::deque<std::function<void()>> queue;
  std::size_t active = 0;
  bool shutting_down = false;
  std::vector<std::thread> workers;

  std::mutex jobs_mutex;
  std::map<std::string, Job> jobs;
  std::map<std::string, std::string> inflight_summaries;  // session/color -> job id
  std::atomic<std::uint64_t> next_job{1};

  void work() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(queue_mutex);
        queue_cv.wait(lock, [&] { return shutting_down || !queue.empty(); });
        if (queue.empty()) return;
        task = std::move(queue.front());
        queue.pop_front();
        ++active;
      }
      task();
      {
        std::lock_guard lock(queue_mutex);
        --active;
      }
      idle_cv.notify_all();
    }
  }

  void drain() {
    std::unique_lock lock(queue_mutex);
    idle_cv.wait(lock, [&] { return queue.empty() && active == 0; });
  }

  /// Registers a job and queues `run`, which returns the result or throws.
  std::string submit(const std::string& session, const std::string& kind, std::function<json()> run) {
    const std::string id = "job-" + std::to_string(next_job++);
    {
      std::lock_guard lock(jobs_mutex);
      jobs[id] = Job{id, session, kind};
    }
    auto task = [this, id, run = std::move(run)] {
      set_status(id, "running");
      json result = nullptr;
      json error = nullptr;
      try {
        result = run();
      } catch (const Error& e) {
        error = error_json(e.code(), e.what(), e.detail());
      } catch (const std::exception& e) {
        error = error_json(ErrorCode::internal, e.what(), "");
      }
      std::lock_guard lock(jobs_mutex);
      auto& job = jobs[id];
      if (error.is_null() && result.is_object() && result.contains("error") && !result["error"].is_null()) {
        // Degraded outcome: the result is usable but the provider failed.
        error = result["error"];
        result.erase("error");
      }
      job.result = std::move(result);
      job.error = std::move(error);
      job.status = job.error.is_null() ? "succeeded" : "failed";
      for (auto it = inflight_summaries.begin(); it != inflight_summaries.end(); ++it) {
        if (it->second == id) {
          inflight_summaries.erase(it);
          break;
        }
      }
    };
    {
      std::lock_guard lock(queue_mutex);
      queue.push_back(std::move(task));
    }
    queue_cv.notify_one();
    return id;
  }

  void set_status(const std::string& id, const std::string& status) {
    std::lock_guard lock(jobs_mutex);
    jobs[id].status = status;
  }

  std::shared_ptr<Session> session(const httplib::Request& req, const json& body) {
    return sessions.get(session_param(req, body));
  }

  BodyLookup bodies() const {
    return [this](std::string_view target) -> std::optional<std::string> {
      if (const auto* b = data.corpus.body_of(target)) return *b;
      return std::nullopt;
    };
  }

  // --- views ----------------------------------------------------------------

  json node_json(const CircleNode& node, const LayoutCircle& geom, const std::set<std::string>* scope) const {
    json j{{"ref_id", node.ref_id}, {"level", std::string(to_string(node.level))},
           {"x", geom.x},           {"y", geom.y},
           {"r", geom.r},           {"weight", node.weight}};
    if (node.level == NodeLevel::post) {
      j["title"] = node.title;
      j["rank"] = node.rank;
      json similar = json::array();
      if (scope)
        for (const auto& id : data.similar.neighbors(node.ref_id, *scope)) similar.push_back(id);
      j["similar_ids"] = similar;
    }
    if (node.keywords) j["keywords"] = node.keywords->keywords;
    if (node.labels) j["labels"] = labels_of(node.labels);
    std::set<std::string> child_scope;
    if (node.level == NodeLevel::topic)
      for (const auto& c : node.children) child_scope.insert(c.ref_id);
    json children = json::array();
    for (const auto& child : node.children) {
      const LayoutCircle* g = geom.find_child(child.ref_id);
      if (!g) throw Error(ErrorCode::internal, "layout out of sync for " + child.ref_id);
      children.push_back(node_json(child, *g, node.level == NodeLevel::topic ? &child_scope : nullptr));
    }
    j["children"] = children;
    return j;
  }

  /// Post scope for similar_ids when the visible root is a post: its topic.
  std::set<std::string> topic_scope(const Explorer& ex, const std::vector<std::string>& path) const {
    std::set<std::string> scope;
    if (path.empty()) return scope;
    if (const auto* topic = ex.visible().find_child(path[0]))
      for (const auto& c : topic->children) scope.insert(c.ref_id);
    return scope;
  }

  json view_json(const Session& s, const ZoomView& v, const std::string& status = "ok") const {
    json root = nullptr;
    if (v.node && v.layout) {
      std::set<std::string> scope;
      const std::set<std::string>* scope_ptr = nullptr;
      if (v.node->level == NodeLevel::post) {
        scope = topic_scope(*s.explorer, v.path);
        scope_ptr = &scope;
      }
      root = node_json(*v.node, *v.layout, scope_ptr);
    }
    json posts = json::array();
    if (s.explorer) {
      for (const auto& id : v.post_ids) {
        const Post& p = data.corpus.post(id);
        json entry{{"id", id}, {"title", p.title}, {"rank", 0}, {"comment_count", p.comment_ids.size()},
                   {"labels", json_io::labels_json(data.labels.post_labels(id))}};
        for (const auto& topic : s.explorer->hierarchy().children)
          if (const auto* node = topic.find_child(id)) entry["rank"] = node->rank;
        posts.push_back(entry);
      }
    }
    return json{{"schema_version", kSchemaVersion},
                {"session", s.id},
                {"status", status},
                {"query", s.query},
                {"view_version", v.version},
                {"level", std::string(to_string(v.level))},
                {"path", v.path},
                {"root", root},
                {"histogram", histogram_json(v.histogram)},
                {"posts", posts},
                {"filter", s.explorer ? filter_json(s.explorer->filter()) : filter_json({})}};
  }

  json empty_view(const Session& s, const std::string& status) const {
    ZoomView v;
    v.histogram.direction = Direction::seeking;
    return view_json(s, v, status);
  }

  json run_search(Session& s, const std::string& query) {
    const auto& cfg = options.config;
    auto response = data.index.search(query, SearchConfig{cfg.n_top});
    s.query = query;
    if (response.status == SearchStatus::empty_query || response.results.empty()) {
      s.explorer.reset();
      return empty_view(s, response.status == SearchStatus::empty_query ? "empty_query" : "no_results");
    }
    std::vector<TopicDocument> docs;
    docs.reserve(response.results.size());
    for (const auto& r : response.results) docs.push_back({r.post_id, data.corpus.post(r.post_id).full_text()});
    std::size_t non_empty = 0;
    for (const auto& d : docs)
      if (!text::tokenize(d.text).empty()) ++non_empty;
    LdaConfig lda;
    lda.k = std::max<std::size_t>(1, std::min(cfg.k, non_empty));
    lda.beta = cfg.beta;
    lda.iterations = cfg.iterations;
    lda.seed = cfg.seed;
    const TopicModel model = fit_lda(docs, lda);
    const auto assignments = assign_topics(model, docs);
    const auto keywords = topic_keywords(model, cfg.keywords);
    CircleNode root = build_hierarchy(response.results, assignments, keywords, data.labels, data.corpus);
    s.explorer.emplace(std::move(root));
    return view_json(s, s.explorer->current());
  }

  Explorer& explorer_of(Session& s) {
    if (!s.explorer) throw BadRequest("no active search in this session; call /api/search first");
    return *s.explorer;
  }

  // --- posts and notes ------------------------------------------------------

  json post_json(const std::string& id, const Session* s) const {
    const auto pwc = get_post(data.corpus, id);
    json comments = json::array();
    for (const auto& c : pwc.comments)
      comments.push_back({{"id", c.id},
                          {"body", c.body},
                          {"depth", c.depth},
                          {"created_utc", c.created_utc},
                          {"labels", json_io::labels_json(data.labels.comment_labels(c.id))}});
    json highlights = json::array();
    if (s) {
      auto add = [&](std::string_view target) {
        for (const auto* h : s->notes.highlights_on(target)) highlights.push_back(json_io::highlight_json(*h));
      };
      add(pwc.post.id);
      for (const auto& c : pwc.comments) add(c.id);
    }
    return json{{"schema_version", kSchemaVersion},
                {"post",
                 {{"id", pwc.post.id},
                  {"title", pwc.post.title},
                  {"body", pwc.post.body},
                  {"created_utc", pwc.post.created_utc},
                  {"labels", json_io::labels_json(data.labels.post_labels(pwc.post.id))}}},
                {"comments", comments},
                {"highlights", highlights}};
  }

  json highlight_reply(const Session& s, const Highlight& h) const {
    return json{{"schema_version", kSchemaVersion},
                {"highlight", json_io::highlight_json(h)},
                {"folder", folder_json(s, h.color)}};
  }

  json folder_json(const Session& s, const std::string& color) const {
    const Folder f = s.notes.folder(color);
    json entries = json::array();
    for (const auto& id : f.entries) entries.push_back(json_io::highlight_json(s.notes.get(id)));
    json summary = nullptr;
    if (auto it = s.summaries.find(color); it != s.summaries.end()) summary = json_io::summary_json(it->second);
    return json{{"schema_version", kSchemaVersion}, {"color", color}, {"entries", entries}, {"summary", summary}};
  }

  void check_color(const Session& s, const std::string& color) const {
    if (!s.notes.palette().contains(color)) throw NotFound("unknown folder color '" + color + "'");
  }

  json mindmap_reply(const Session& s, const std::string& color) const {
    auto it = s.mindmaps.find(color);
    if (it == s.mindmaps.end()) throw NotFound("no mind map for folder '" + color + "'; summarize it first");
    json j = json_io::mindmap_json(it->second);
    j["schema_version"] = kSchemaVersion;
    j["color"] = color;
    return j;
  }

  // --- boards ---------------------------------------------------------------

  json board_reply(const QuestionBoard& b) const {
    json j = json_io::board_json(b);
    j["schema_version"] = kSchemaVersion;
    return j;
  }

  QuestionBoard& board_of(Session& s, const std::string& id) {
    auto it = s.boards.find(id);
    if (it == s.boards.end()) throw NotFound("unknown board '" + id + "'");
    return it->second;
  }

  /// Answers `node_id` on a copy outside the session lock, then copies the
  /// outcome back if the node still exists.
  std::string submit_resolve(const std::shared_ptr<Session>& sp, const std::string& board_id,
                             const std::string& node_id) {
    return submit(sp->id, "answer", [this, sp, board_id, node_id]() -> json {
      QuestionBoard copy;
      {
        std::lock_guard lock(sp->mutex);
        copy = board_of(*sp, board_id);
      }
      copy.resolve(node_id, *provider);
      const QuestionNode* done = copy.find(node_id);
      std::lock_guard lock(sp->mutex);
      QuestionBoard& live = board_of(*sp, board_id);
      QuestionNode* target = live.find(node_id);
      if (!target) throw NotFound("question node '" + node_id + "' was removed");
      target->answer = done->answer;
      target->state = done->state;
      target->error = done->error;
      target->recommendations = done->recommendations;
      target->recommendations_stale = done->recommendations_stale;
      sessions.persist(*sp);
      json out{{"board", board_reply(live)}, {"node", json_io::question_node_json(*target)}};
      if (target->state == AnswerState::error)
        out["error"] = error_json(ErrorCode::upstream_llm, "answer generation failed", target->error);
      return out;
    });
  }

  json accepted(const std::string& job_id) {
    std::lock_guard lock(jobs_mutex);
    return job_json(jobs.at(job_id));
  }

  // --- routing --------------------------------------------------------------

  using Handler = std::function<json(const httplib::Request&, httplib::Response&)>;

  httplib::Server::Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      json out;
      try {
        out = h(req, res);
        if (res.status == -1 || res.status == 0) res.status = 200;
      } catch (const Error& e) {
        res.status = http_status(e.code());
        out = error_json(e.code(), e.what(), e.detail());
      } catch (const json::exception& e) {
        res.status = 400;
        out = error_json(ErrorCode::bad_request, "malformed JSON value", e.what());
      } catch (const std::exception& e) {
        res.status = 500;
        out = error_json(ErrorCode::internal, e.what(), "");
      }
      res.set_content(out.dump(), "application/json");
    };
  }

  void routes() {
    http.Get("/api/health", wrap([this](const auto&, auto&) {
               return json{{"status", "ok"},
                           {"posts", data.corpus.post_count()},
                           {"comments", data.corpus.comment_count()},
                           {"provider", provider->name()}};
             }));

    http.Post("/api/session", wrap([this](const auto&, auto& res) {
                auto s = sessions.create();
                std::lock_guard lock(s->mutex);
                sessions.persist(*s);
                res.status = 201;
                return json{{"schema_version", kSchemaVersion},
                            {"id", s->id},
                            {"created_at", s->created_at},
                            {"palette", s->notes.palette().colors()}};
              }));

    http.Get(R"(/api/session/([0-9a-f]+)/export)", wrap([this](const auto& req, auto&) {
               auto s = sessions.get(req.matches[1]);
               std::lock_guard lock(s->mutex);
               return json::parse(export_session(*s));
             }));

    http.Post("/api/session/import", wrap([this](const auto& req, auto& res) {
                auto s = sessions.import_document(req.body);
                res.status = 201;
                std::lock_guard lock(s->mutex);
                return json{{"schema_version", kSchemaVersion},
                            {"id", s->id},
                            {"created_at", s->created_at},
                            {"palette", s->notes.palette().colors()}};
              }));

    http.Get("/api/search", wrap([this](const auto& req, auto&) {
               auto s = session(req, json::object());
               if (!req.has_param("q")) throw BadRequest("missing query parameter 'q'");
               std::lock_guard lock(s->mutex);
               return run_search(*s, req.get_param_value("q"));
             }));

    http.Post("/api/zoom", wrap([this](const auto& req, auto&) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const auto path = body.contains("path") ? field<std::vector<std::string>>(body, "path")
                                                        : std::vector<std::string>{};
                std::optional<std::uint64_t> version;
                if (body.contains("version") && !body["version"].is_null())
                  version = field<std::uint64_t>(body, "version");
                std::lock_guard lock(s->mutex);
                auto& ex = explorer_of(*s);
                return view_json(*s, ex.zoom(path, version));
              }));

    http.Post("/api/filter", wrap([this](const auto& req, auto&) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const SupportFilter f = filter_from(body);
                std::lock_guard lock(s->mutex);
                auto& ex = explorer_of(*s);
                return view_json(*s, ex.set_filter(f));
              }));

    http.Get(R"(/api/post/([^/]+))", wrap([this](const auto& req, auto&) {
               std::shared_ptr<Session> s;
               if (req.has_param("session")) s = sessions.get(req.get_param_value("session"));
               if (!s) return post_json(req.matches[1], nullptr);
               std::lock_guard lock(s->mutex);
               return post_json(req.matches[1], s.get());
             }));

    http.Post("/api/highlight", wrap([this](const auto& req, auto& res) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const json a = field<json>(body, "anchor");
                const Anchor anchor{field<std::string>(a, "target"), field<std::size_t>(a, "char_start"),
                                    field<std::size_t>(a, "char_end"), field<std::string>(a, "exact_text")};
                const auto color = field<std::string>(body, "color");
                std::lock_guard lock(s->mutex);
                const Highlight& h = s->notes.add_highlight(anchor, color, bodies());
                sessions.persist(*s);
                res.status = 201;
                return highlight_reply(*s, h);
              }));

    http.Post(R"(/api/highlight/([^/]+)/recolor)", wrap([this](const auto& req, auto&) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const auto color = field<std::string>(body, "color");
                std::lock_guard lock(s->mutex);
                const Highlight& h = s->notes.recolor(req.matches[1], color, bodies());
                sessions.persist(*s);
                return highlight_reply(*s, h);
              }));

    http.Post(R"(/api/highlight/([^/]+)/edit)", wrap([this](const auto& req, auto&) {
                const json body = parse_body(req);
                auto s = session(req, body);
                auto text = field<std::string>(body, "text");
                std::lock_guard lock(s->mutex);
                const Highlight& h = s->notes.edit_entry(req.matches[1], std::move(text));
                sessions.persist(*s);
                return highlight_reply(*s, h);
              }));

    http.Get(R"(/api/highlight/([^/]+)/navigate)", wrap([this](const auto& req, auto&) {
               auto s = session(req, json::object());
               std::lock_guard lock(s->mutex);
               const Anchor& a = s->notes.navigate(req.matches[1]);
               std::string post_id = a.target;
               if (const auto* c = data.corpus.find_comment(a.target)) post_id = c->post_id;
               return json{{"schema_version", kSchemaVersion},
                           {"highlight", req.matches[1]},
                           {"post_id", post_id},
                           {"anchor", json_io::anchor_json(a)}};
             }));

    http.Delete(R"(/api/highlight/([^/]+))", wrap([this](const auto& req, auto&) {
                  auto s = session(req, json::object());
                  std::lock_guard lock(s->mutex);
                  s->notes.clear(req.matches[1]);
                  sessions.persist(*s);
                  return json{{"schema_version", kSchemaVersion}, {"deleted", req.matches[1]}};
                }));

    http.Get(R"(/api/folder/([^/]+))", wrap([this](const auto& req, auto&) {
               auto s = session(req, json::object());
               std::lock_guard lock(s->mutex);
               check_color(*s, req.matches[1]);
               return folder_json(*s, req.matches[1]);
             }));

    http.Post(R"(/api/folder/([^/]+)/summary)", wrap([this](const auto& req, auto&) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const std::string color = req.matches[1];
                llm::SummaryDoc doc;
                try {
                  doc = json_io::summary_from(field<json>(body, "summary"));
                } catch (const json::exception& e) {
                  throw BadRequest("malformed summary", e.what());
                }
                doc.source_color = color;
                std::lock_guard lock(s->mutex);
                check_color(*s, color);
                std::optional<llm::MindMap> previous;
                if (auto it = s->mindmaps.find(color); it != s->mindmaps.end()) previous = it->second;
                s->mindmaps[color] = llm::derive_mindmap(doc, previous);
                s->summaries[color] = std::move(doc);
                sessions.persist(*s);
                return folder_json(*s, color);
              }));

    http.Post(R"(/api/folder/([^/]+)/summarize)", wrap([this](const auto& req, auto& res) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const std::string color = req.matches[1];
                {
                  std::lock_guard lock(s->mutex);
                  check_color(*s, color);
                  if (s->notes.folder(color).entries.empty())
                    throw BadRequest("folder '" + color + "' is empty; highlight some text first");
                }
                const std::string key = s->id + "/" + color;
                res.status = 202;
                {
                  std::lock_guard lock(jobs_mutex);
                  if (auto it = inflight_summaries.find(key); it != inflight_summaries.end())
                    return job_json(jobs.at(it->second));
                }
                const std::string id = submit(s->id, "summary", [this, s, color]() -> json {
                  std::vector<std::string> entries;
                  std::optional<llm::SummaryDoc> previous;
                  {
                    std::lock_guard lock(s->mutex);
                    for (const auto& hid : s->notes.folder(color).entries)
                      entries.push_back(s->notes.get(hid).display_text());
                    if (auto it = s->summaries.find(color); it != s->summaries.end()) previous = it->second;
                  }
                  auto outcome = llm::summarize(entries, color, *provider, previous);
                  std::lock_guard lock(s->mutex);
                  json out{{"attempts", outcome.attempts}};
                  if (outcome.error) {
                    if (previous) s->summaries[color] = outcome.doc;
                    out["error"] = error_json(ErrorCode::upstream_llm, "summary generation failed", *outcome.error);
                  } else {
                    std::optional<llm::MindMap> prev_map;
                    if (auto it = s->mindmaps.find(color); it != s->mindmaps.end()) prev_map = it->second;
                    s->mindmaps[color] = llm::derive_mindmap(outcome.doc, prev_map);
                    s->summaries[color] = outcome.doc;
                  }
                  sessions.persist(*s);
                  out["folder"] = folder_json(*s, color);
                  return out;
                });
                {
                  std::lock_guard lock(jobs_mutex);
                  // The job may already have finished; only track it while pending.
                  if (jobs.at(id).status == "queued" || jobs.at(id).status == "running")
                    inflight_summaries[key] = id;
                }
                return accepted(id);
              }));

    http.Get(R"(/api/mindmap/([^/]+))", wrap([this](const auto& req, auto&) {
               auto s = session(req, json::object());
               std::lock_guard lock(s->mutex);
               check_color(*s, req.matches[1]);
               return mindmap_reply(*s, req.matches[1]);
             }));

    http.Post(R"(/api/mindmap/([^/]+)/node)", wrap([this](const auto& req, auto& res) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const std::string color = req.matches[1];
                const auto raw_label = field<std::string>(body, "label");
                const auto label = text::trim(raw_label);
                if (label.empty()) throw BadRequest("node label must not be blank");
                std::lock_guard lock(s->mutex);
                check_color(*s, color);
                auto it = s->mindmaps.find(color);
                if (it == s->mindmaps.end()) throw NotFound("no mind map for folder '" + color + "'");
                llm::MindMapNode node{std::string(label), true, {}};
                if (body.contains("parent") && body["parent"].is_string()) {
                  const auto parent = body["parent"].get<std::string>();
                  auto& nodes = it->second.nodes;
                  auto p = std::find_if(nodes.begin(), nodes.end(), [&](const auto& n) { return n.label == parent; });
                  if (p == nodes.end()) throw NotFound("unknown mind map node '" + parent + "'");
                  p->children.push_back(std::move(node));
                } else {
                  it->second.nodes.push_back(std::move(node));
                }
                sessions.persist(*s);
                res.status = 201;
                return mindmap_reply(*s, color);
              }));

    http.Post("/api/board", wrap([this](const auto& req, auto& res) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const auto selected = field<std::string>(body, "selected_text");
                const auto target = body.value("target", std::string{});
                std::string board_id;
                {
                  std::lock_guard lock(s->mutex);
                  board_id = "b" + std::to_string(s->next_board);
                  QuestionBoard board(board_id, selected, target);
                  ++s->next_board;
                  s->boards.emplace(board_id, std::move(board));
                  sessions.persist(*s);
                }
                const std::string job = submit(s->id, "questions", [this, s, board_id, selected]() -> json {
                  auto set = llm::recommend_questions(selected, std::nullopt, *provider);
                  std::lock_guard lock(s->mutex);
                  QuestionBoard& b = board_of(*s, board_id);
                  b.set_recommended(set.questions, set.degraded);
                  sessions.persist(*s);
                  json out{{"board", board_reply(b)}};
                  if (set.degraded)
                    out["error"] = error_json(ErrorCode::upstream_llm, "question recommendation degraded",
                                              "fallback questions were used");
                  return out;
                });
                res.status = 202;
                std::lock_guard lock(s->mutex);
                return json{{"schema_version", kSchemaVersion},
                            {"board", board_reply(board_of(*s, board_id))},
                            {"job", accepted(job)}};
              }));

    http.Get(R"(/api/board/([^/]+))", wrap([this](const auto& req, auto&) {
               auto s = session(req, json::object());
               std::lock_guard lock(s->mutex);
               return board_reply(board_of(*s, req.matches[1]));
             }));

    auto add_question = [this](const httplib::Request& req, httplib::Response& res, bool branch) {
      const json body = parse_body(req);
      auto s = session(req, body);
      const std::string board_id = req.matches[1];
      const auto question = field<std::string>(body, "question");
      std::string node_id;
      {
        std::lock_guard lock(s->mutex);
        QuestionBoard& b = board_of(*s, board_id);
        const auto& rec = b.recommended();
        QuestionOrigin origin = std::find(rec.begin(), rec.end(), question) != rec.end() ? QuestionOrigin::recommended
                                                                                       : QuestionOrigin::user;
        if (branch) {
          const auto parent = field<std::string>(body, "parent");
          if (const auto* p = b.find(parent)) {
            const auto& follow = p->recommendations;
            if (std::find(follow.begin(), follow.end(), question) != follow.end()) origin = QuestionOrigin::recommended;
          }
          node_id = b.branch(parent, question, origin).id;
        } else {
          node_id = b.add_thread(question, origin).id;
        }
        sessions.persist(*s);
      }
      const std::string job = submit_resolve(s, board_id, node_id);
      res.status = 202;
      std::lock_guard lock(s->mutex);
      return json{{"schema_version", kSchemaVersion},
                  {"board", board_reply(board_of(*s, board_id))},
                  {"node", node_id},
                  {"job", accepted(job)}};
    };
    http.Post(R"(/api/board/([^/]+)/ask)",
              wrap([add_question](const auto& req, auto& res) { return add_question(req, res, false); }));
    http.Post(R"(/api/board/([^/]+)/branch)",
              wrap([add_question](const auto& req, auto& res) { return add_question(req, res, true); }));

    http.Post(R"(/api/board/([^/]+)/collapse)", wrap([this](const auto& req, auto&) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const bool collapsed = field<bool>(body, "collapsed");
                std::lock_guard lock(s->mutex);
                QuestionBoard& b = board_of(*s, req.matches[1]);
                b.set_collapsed(collapsed);
                sessions.persist(*s);
                return board_reply(b);
              }));

    http.Post(R"(/api/board/([^/]+)/answer)", wrap([this](const auto& req, auto&) {
                const json body = parse_body(req);
                auto s = session(req, body);
                const auto node = field<std::string>(body, "node");
                auto text = field<std::string>(body, "text");
                std::lock_guard lock(s->mutex);
                QuestionBoard& b = board_of(*s, req.matches[1]);
                b.edit_answer(node, std::move(text));
                sessions.persist(*s);
                return board_reply(b);
              }));

    http.Get(R"(/api/job/([^/]+))", wrap([this](const auto& req, auto&) {
               const std::string sid = session_param(req, json::object());
               std::lock_guard lock(jobs_mutex);
               auto it = jobs.find(req.matches[1]);
               if (it == jobs.end() || it->second.session != sid)
                 throw NotFound("unknown job '" + std::string(req.matches[1]) + "'");
               return job_json(it->second);
             }));

    if (!options.static_dir.empty() && std::filesystem::is_directory(options.static_dir))
      http.set_mount_point("/", options.static_dir.string());

    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      const ErrorCode code = res.status == 404 ? ErrorCode::not_found
                             : res.status < 500 ? ErrorCode::bad_request
                                                : ErrorCode::internal;
      res.set_content(error_json(code, "no such route", "").dump(), "application/json");
    });
  }
};

ApiServer::ApiServer(ServerData data, ServerOptions options, std::unique_ptr<llm::ChatProvider> provider)
    : impl_(std::make_unique<Impl>(std::move(data), std::move(options),
                                   provider ? std::move(provider) : std::make_unique<llm::StubChatProvider>())) {}

ApiServer::~ApiServer() {
  stop();
}

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->http.bind_to_any_port(host);
    if (bound <= 0) throw std::runtime_error("cannot bind " + host);
    return bound;
  }
  if (!impl_->http.bind_to_port(host, port))
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void ApiServer::run() {
  impl_->http.listen_after_bind();
}

void ApiServer::stop() {
  if (impl_) impl_->http.stop();
}

void ApiServer::drain() {
  impl_->drain();
}

}  // namespace comviewer
