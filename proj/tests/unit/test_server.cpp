#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "api.hpp"
#include "comviewer/error.hpp"
#include "comviewer/server.hpp"
#include "fixture.hpp"
#include "fixtures.hpp"

using namespace comviewer;
using api::json;

namespace {

/// Stub answers unless switched to failing.
class SwitchProvider : public llm::ChatProvider {
 public:
  explicit SwitchProvider(std::atomic<bool>& fail) : fail_(fail) {}
  std::string name() const override { return "switch"; }
  std::string complete(const std::string& prompt) override {
    if (fail_) throw UpstreamError("LLM provider unreachable");
    return llm::StubChatProvider::default_response(prompt);
  }

 private:
  std::atomic<bool>& fail_;
};

ServerData desk_data() {
  const auto dir = fixtures::scratch("server-data");
  fixture::write_desk_dump(dir / "dump.jsonl", {60, 7});
  ServerData d;
  d.corpus = Corpus::from_dump(dir / "dump.jsonl");
  d.index = InvertedIndex::build(d.corpus);
  d.labels = label_corpus(d.corpus, HeuristicProvider(Lexicon::load_default()));
  std::set<std::string> ids;
  for (const auto& p : d.corpus.posts()) ids.insert(p.id);
  d.similar = SimilarityIndex(similar_pairs(embed_corpus(d.corpus), 0.6), ids);
  return d;
}

class ServerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    schemas_ = new SchemaRegistry(SchemaRegistry::load_dir(std::string(COMVIEWER_SOURCE_DIR) + "/schemas"));
    sessions_dir_ = fixtures::scratch("server-sessions");
    ServerOptions opts;
    opts.sessions_dir = sessions_dir_;
    opts.config.iterations = 100;
    server_ = new ApiServer(desk_data(), opts, std::make_unique<SwitchProvider>(fail_));
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = new std::thread([] { server_->run(); });
  }
  static void TearDownTestSuite() {
    server_->stop();
    thread_->join();
    delete thread_;
    delete server_;
    delete schemas_;
  }
  void SetUp() override { fail_ = false; }

  api::Client client() { return api::Client("127.0.0.1", port_, schemas_); }

  /// Request plus schema check in one step.
  api::Reply expect(api::Reply r, int status, const std::string& schema) {
    EXPECT_EQ(r.status, status) << r.raw;
    const auto errs = client().check(r, schema);
    EXPECT_TRUE(errs.empty()) << schema << ": " << (errs.empty() ? "" : errs[0]) << "\n" << r.raw.substr(0, 400);
    return r;
  }

  std::string new_session() { return expect(client().post("/api/session"), 201, "session").body["id"]; }

  static inline SchemaRegistry* schemas_ = nullptr;
  static inline ApiServer* server_ = nullptr;
  static inline std::thread* thread_ = nullptr;
  static inline int port_ = 0;
  static inline std::atomic<bool> fail_{false};
  static inline std::filesystem::path sessions_dir_;
};

}  // namespace

TEST_F(ServerTest, HealthAndUnknownRoutes) {
  auto c = client();
  expect(c.get("/api/health"), 200, "health");
  auto r = expect(c.get("/api/nothing"), 404, "error");
  EXPECT_EQ(r.body["code"], "not_found");
  EXPECT_EQ(expect(c.get("/api/search?q=exam&session=ffff"), 404, "error").body["code"], "not_found");
  EXPECT_EQ(expect(c.get("/api/search?q=exam"), 400, "error").body["code"], "bad_request");
  EXPECT_EQ(expect(c.post_raw("/api/zoom", "{oops"), 400, "error").body["code"], "bad_request");
}

TEST_F(ServerTest, SearchZoomFilterFlow) {
  auto c = client();
  const auto s = new_session();
  auto v = expect(c.get("/api/search?q=exam%20sleep&session=" + s), 200, "view").body;
  ASSERT_EQ(v["status"], "ok");
  ASSERT_FALSE(v["root"]["children"].empty());
  EXPECT_EQ(v["level"], "topic");
  const auto topic = v["root"]["children"][0]["ref_id"].get<std::string>();
  const auto post = v["root"]["children"][0]["children"][0]["ref_id"].get<std::string>();
  const auto version = v["view_version"].get<std::uint64_t>();

  auto z = expect(c.post("/api/zoom", {{"session", s}, {"path", {topic}}, {"version", version}}), 200, "view").body;
  EXPECT_EQ(z["level"], "post");
  z = expect(c.post("/api/zoom", {{"session", s}, {"path", {topic, post}}, {"version", version}}), 200, "view").body;
  EXPECT_EQ(z["level"], "comment");
  EXPECT_EQ(z["histogram"]["direction"], "providing");
  EXPECT_EQ(expect(c.post("/api/zoom", {{"session", s}, {"path", {topic, post, "x"}}}), 400, "error").body["code"],
            "bad_request");

  auto f = expect(c.post("/api/filter", {{"session", s},
                                          {"selections", {{{"direction", "providing"}, {"kind", "emotional"}, {"level", "high"}}}}}),
                  200, "view")
               .body;
  EXPECT_GT(f["view_version"].get<std::uint64_t>(), version);
  auto stale = expect(c.post("/api/zoom", {{"session", s}, {"path", json::array()}, {"version", version}}), 409, "error");
  EXPECT_EQ(stale.body["code"], "stale_view");
  EXPECT_EQ(expect(c.post("/api/filter", {{"session", s},
                                           {"selections", {{{"direction", "sideways"}, {"kind", "emotional"}, {"level", "high"}}}}}),
                   400, "error")
                .body["code"],
            "bad_request");

  auto empty = expect(c.get("/api/search?q=the&session=" + s), 200, "view").body;
  EXPECT_EQ(empty["status"], "empty_query");
  EXPECT_TRUE(empty["root"].is_null());
  auto none = expect(c.get("/api/search?q=zzzzqqq&session=" + s), 200, "view").body;
  EXPECT_EQ(none["status"], "no_results");
}

TEST_F(ServerTest, SessionsAreIsolated) {
  auto c = client();
  const auto a = new_session();
  const auto b = new_session();
  expect(c.get("/api/search?q=exam&session=" + a), 200, "view");
  // b has not searched, so it has no view to zoom.
  EXPECT_GE(c.post("/api/zoom", {{"session", b}, {"path", json::array()}}).status, 400);

  auto p = expect(c.get("/api/post/p0001?session=" + a), 200, "post").body;
  const auto body = p["post"]["body"].get<std::string>();
  auto h = expect(c.post("/api/highlight", {{"session", a},
                                            {"color", "yellow"},
                                            {"anchor", {{"target", "p0001"}, {"char_start", 0}, {"char_end", 4},
                                                        {"exact_text", body.substr(0, 4)}}}}),
                  201, "highlight")
               .body;
  const auto hid = h["highlight"]["id"].get<std::string>();
  EXPECT_EQ(expect(c.get("/api/folder/yellow?session=" + a), 200, "folder").body["entries"].size(), 1u);
  EXPECT_EQ(expect(c.get("/api/folder/yellow?session=" + b), 200, "folder").body["entries"].size(), 0u);
  EXPECT_EQ(c.get("/api/highlight/" + hid + "/navigate?session=" + b).status, 404);
  expect(c.get("/api/highlight/" + hid + "/navigate?session=" + a), 200, "navigate");
}

TEST_F(ServerTest, HighlightLifecycle) {
  auto c = client();
  const auto s = new_session();
  const auto body = c.get("/api/post/p0002").body["post"]["body"].get<std::string>();
  auto mk = [&](std::size_t a, std::size_t b, const std::string& color) {
    return c.post("/api/highlight", {{"session", s},
                                     {"color", color},
                                     {"anchor", {{"target", "p0002"}, {"char_start", a}, {"char_end", b},
                                                 {"exact_text", body.substr(a, b - a)}}}});
  };
  const auto h1 = expect(mk(0, 5, "yellow"), 201, "highlight").body["highlight"]["id"].get<std::string>();
  const auto h2 = expect(mk(5, 9, "yellow"), 201, "highlight").body["highlight"]["id"].get<std::string>();
  EXPECT_EQ(h1, h2);  // touching spans merge

  auto mismatch = expect(c.post("/api/highlight", {{"session", s},
                                                   {"color", "yellow"},
                                                   {"anchor", {{"target", "p0002"}, {"char_start", 0}, {"char_end", 3},
                                                               {"exact_text", "zzz"}}}}),
                         400, "error");
  EXPECT_NE(mismatch.body["detail"].get<std::string>().find("expected"), std::string::npos);
  EXPECT_EQ(expect(mk(0, 3, "purple"), 400, "error").body["code"], "bad_request");

  expect(c.post("/api/highlight/" + h1 + "/recolor", {{"session", s}, {"color", "red"}}), 200, "highlight");
  auto e = expect(c.post("/api/highlight/" + h1 + "/edit", {{"session", s}, {"text", "mine"}}), 200, "highlight");
  EXPECT_EQ(e.body["highlight"]["display_text"], "mine");
  expect(c.del("/api/highlight/" + h1 + "?session=" + s), 200, "deleted");
  expect(c.del("/api/highlight/" + h1 + "?session=" + s), 404, "error");
}

TEST_F(ServerTest, SummaryJobsAndMindMap) {
  auto c = client();
  const auto s = new_session();
  EXPECT_EQ(expect(c.post("/api/folder/green/summarize", {{"session", s}}), 400, "error").body["code"], "bad_request");
  const auto body = c.get("/api/post/p0003").body["post"]["body"].get<std::string>();
  expect(c.post("/api/highlight", {{"session", s},
                                   {"color", "green"},
                                   {"anchor", {{"target", "p0003"}, {"char_start", 0}, {"char_end", 10},
                                               {"exact_text", body.substr(0, 10)}}}}),
         201, "highlight");

  auto job = expect(c.post("/api/folder/green/summarize", {{"session", s}}), 202, "job").body;
  auto done = expect(c.wait_job(job["id"], s), 200, "job").body;
  EXPECT_EQ(done["status"], "succeeded");
  EXPECT_EQ(done["kind"], "summary");
  auto folder = expect(c.get("/api/folder/green?session=" + s), 200, "folder").body;
  EXPECT_EQ(folder["summary"]["title"], "Collected Suggestions");

  auto mm = expect(c.get("/api/mindmap/green?session=" + s), 200, "mindmap").body;
  EXPECT_EQ(mm["nodes"].size(), 2u);
  expect(c.post("/api/mindmap/green/node", {{"session", s}, {"label", "my idea"}}), 201, "mindmap");

  // A failing provider gives a failed job, not a server error, and keeps the
  // previous summary marked stale.
  fail_ = true;
  job = expect(c.post("/api/folder/green/summarize", {{"session", s}}), 202, "job").body;
  done = expect(c.wait_job(job["id"], s), 200, "job").body;
  EXPECT_EQ(done["status"], "failed");
  EXPECT_EQ(done["error"]["code"], "upstream_llm");
  folder = expect(c.get("/api/folder/green?session=" + s), 200, "folder").body;
  EXPECT_EQ(folder["summary"]["title"], "Collected Suggestions");
  EXPECT_EQ(folder["summary"]["stale"], true);
  mm = expect(c.get("/api/mindmap/green?session=" + s), 200, "mindmap").body;
  EXPECT_EQ(mm["nodes"].size(), 3u);

  // Jobs belong to their session.
  const auto other = new_session();
  EXPECT_EQ(c.get("/api/job/" + job["id"].get<std::string>() + "?session=" + other).status, 404);
}

TEST_F(ServerTest, QuestionBoards) {
  auto c = client();
  const auto s = new_session();
  auto b = expect(c.post("/api/board", {{"session", s}, {"selected_text", "Try breathing slowly."}, {"target", "p0001"}}),
                  202, "board_job")
               .body;
  const auto bid = b["board"]["id"].get<std::string>();
  expect(c.wait_job(b["job"]["id"], s), 200, "job");
  auto board = expect(c.get("/api/board/" + bid + "?session=" + s), 200, "board").body;
  EXPECT_EQ(board["recommended"].size(), 3u);

  auto ask = expect(c.post("/api/board/" + bid + "/ask", {{"session", s}, {"question", "Why does it help?"}}), 202,
                    "board_job")
                 .body;
  const auto node = ask["node"].get<std::string>();
  EXPECT_EQ(expect(c.wait_job(ask["job"]["id"], s), 200, "job").body["status"], "succeeded");
  auto br = expect(c.post("/api/board/" + bid + "/branch", {{"session", s}, {"parent", node}, {"question", "How?"}}),
                   202, "board_job")
                .body;
  expect(c.wait_job(br["job"]["id"], s), 200, "job");
  expect(c.post("/api/board/" + bid + "/answer", {{"session", s}, {"node", node}, {"text", "edited"}}), 200, "board");
  board = expect(c.post("/api/board/" + bid + "/collapse", {{"session", s}, {"collapsed", true}}), 200, "board").body;
  EXPECT_EQ(board["collapsed"], true);
  EXPECT_EQ(board["threads"][0]["answer"], "edited");
  EXPECT_EQ(board["threads"][0]["children"].size(), 1u);
  EXPECT_EQ(expect(c.post("/api/board/" + bid + "/ask", {{"session", s}, {"question", " "}}), 400, "error").body["code"],
            "bad_request");
  EXPECT_EQ(c.get("/api/board/b99?session=" + s).status, 404);

  fail_ = true;
  ask = expect(c.post("/api/board/" + bid + "/ask", {{"session", s}, {"question", "Anything else?"}}), 202, "board_job")
            .body;
  auto done = expect(c.wait_job(ask["job"]["id"], s), 200, "job").body;
  EXPECT_EQ(done["status"], "failed");
  EXPECT_EQ(done["error"]["code"], "upstream_llm");
}

TEST_F(ServerTest, ExportImport) {
  auto c = client();
  const auto s = new_session();
  const auto body = c.get("/api/post/p0004").body["post"]["body"].get<std::string>();
  expect(c.post("/api/highlight", {{"session", s},
                                   {"color", "red"},
                                   {"anchor", {{"target", "p0004"}, {"char_start", 1}, {"char_end", 6},
                                               {"exact_text", body.substr(1, 5)}}}}),
         201, "highlight");
  auto doc = expect(c.get("/api/session/" + s + "/export"), 200, "session_document");
  EXPECT_TRUE(std::filesystem::exists(sessions_dir_ / (s + ".json")));

  auto imported = expect(c.post_raw("/api/session/import", doc.raw), 201, "session").body;
  EXPECT_EQ(imported["id"], s);
  EXPECT_EQ(expect(c.get("/api/folder/red?session=" + s), 200, "folder").body["entries"].size(), 1u);
  auto bad = doc.body;
  bad["version"] = 42;
  EXPECT_EQ(expect(c.post("/api/session/import", bad), 400, "error").body["code"], "bad_request");
}
