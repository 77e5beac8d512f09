#include "comviewer/session.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "comviewer/error.hpp"
#include "json_io.hpp"

namespace comviewer {

using nlohmann::json;

Session::Session(std::string session_id, Palette palette)
    : id(std::move(session_id)),
      created_at(std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
                     .count()),
      notes(std::move(palette)) {}

std::string export_session(const Session& s) {
  json highlights = json::array();
  for (const auto* h : s.notes.highlights()) highlights.push_back(json_io::highlight_json(*h));
  json folders = json::array();
  for (const auto& f : s.notes.folders()) folders.push_back({{"color", f.color}, {"entries", f.entries}});
  json boards = json::array();
  for (const auto& [id, b] : s.boards) boards.push_back(json_io::board_json(b));
  json summaries = json::object();
  for (const auto& [color, doc] : s.summaries) summaries[color] = json_io::summary_json(doc);
  json mindmaps = json::object();
  for (const auto& [color, m] : s.mindmaps) mindmaps[color] = json_io::mindmap_json(m);
  json doc{{"format", "comviewer-session"},
           {"version", kSessionFormatVersion},
           {"id", s.id},
           {"created_at", s.created_at},
           {"query", s.query},
           {"palette", s.notes.palette().colors()},
           {"highlights", highlights},
           {"folders", folders},
           {"boards", boards},
           {"next_board", s.next_board},
           {"summaries", summaries},
           {"mindmaps", mindmaps}};
  return doc.dump(2);
}

namespace {

json parse_document(std::string_view document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw BadRequest("session document is not a JSON object");
  if (doc.value("format", std::string{}) != "comviewer-session") throw BadRequest("not a session document");
  const int version = doc.value("version", 0);
  if (version != kSessionFormatVersion)
    throw BadRequest("unsupported session version " + std::to_string(version));
  return doc;
}

}  // namespace

std::string session_id_of(std::string_view document) {
  const json doc = parse_document(document);
  if (!doc.contains("id") || !doc["id"].is_string()) throw BadRequest("session document has no id");
  return doc["id"].get<std::string>();
}

void import_session(Session& s, std::string_view document) {
  const json doc = parse_document(document);
  try {
    std::vector<Highlight> highlights;
    for (const auto& h : doc.at("highlights")) {
      auto hl = json_io::highlight_from(h);
      if (!s.notes.palette().contains(hl.color)) throw BadRequest("color '" + hl.color + "' is not in the palette");
      highlights.push_back(std::move(hl));
    }
    std::map<std::string, QuestionBoard> boards;
    for (const auto& b : doc.at("boards")) {
      auto board = json_io::board_from(b);
      const std::string id = board.id();
      boards.emplace(id, std::move(board));
    }
    std::map<std::string, llm::SummaryDoc> summaries;
    const json summary_docs = doc.value("summaries", json::object());
    for (const auto& [color, v] : summary_docs.items()) summaries[color] = json_io::summary_from(v);
    std::map<std::string, llm::MindMap> mindmaps;
    const json mindmap_docs = doc.value("mindmaps", json::object());
    for (const auto& [color, v] : mindmap_docs.items()) mindmaps[color] = json_io::mindmap_from(v);

    s.notes.restore(std::move(highlights));
    s.boards = std::move(boards);
    s.summaries = std::move(summaries);
    s.mindmaps = std::move(mindmaps);
    s.next_board = doc.value("next_board", s.boards.size() + 1);
    s.query = doc.value("query", std::string{});
    s.created_at = doc.value("created_at", s.created_at);
  } catch (const json::exception& e) {
    throw BadRequest(std::string("malformed session document: ") + e.what());
  }
}

std::string new_session_id() {
  static std::mutex mutex;
  static std::random_device device;
  std::lock_guard lock(mutex);
  std::uniform_int_distribution<std::uint32_t> dist;
  std::string out;
  char buf[9];
  for (int i = 0; i < 4; ++i) {
    std::snprintf(buf, sizeof buf, "%08x", dist(device));
    out += buf;
  }
  return out;
}

SessionStore::SessionStore(std::filesystem::path dir, Palette palette)
    : dir_(std::move(dir)), palette_(std::move(palette)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::shared_ptr<Session> SessionStore::create() {
  auto session = std::make_shared<Session>(new_session_id(), palette_);
  std::lock_guard lock(mutex_);
  sessions_[session->id] = session;
  return session;
}

std::shared_ptr<Session> SessionStore::get(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  // Ids are hex; anything else cannot name a file we wrote.
  const bool hex = !id.empty() && id.find_first_not_of("0123456789abcdef") == std::string::npos;
  if (!hex || dir_.empty()) throw NotFound("unknown session '" + id + "'");
  std::ifstream in(dir_ / (id + ".json"), std::ios::binary);
  if (!in) throw NotFound("unknown session '" + id + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto session = std::make_shared<Session>(id, palette_);
  import_session(*session, buf.str());
  sessions_[id] = session;
  return session;
}

void SessionStore::persist(const Session& session) const {
  if (dir_.empty()) return;
  const auto path = dir_ / (session.id + ".json");
  const auto tmp = dir_ / (session.id + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::internal, "cannot write " + tmp.string());
    out << export_session(session);
  }
  std::filesystem::rename(tmp, path);
}

std::shared_ptr<Session> SessionStore::import_document(std::string_view document) {
  std::string id = session_id_of(document);
  const bool hex = !id.empty() && id.find_first_not_of("0123456789abcdef") == std::string::npos;
  if (!hex) id = new_session_id();
  auto session = std::make_shared<Session>(id, palette_);
  import_session(*session, document);
  {
    std::lock_guard lock(mutex_);
    sessions_[id] = session;
  }
  persist(*session);
  return session;
}

}  // namespace comviewer
