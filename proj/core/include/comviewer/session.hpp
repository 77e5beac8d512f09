#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "comviewer/board.hpp"
#include "comviewer/explorer.hpp"
#include "comviewer/llm.hpp"
#include "comviewer/notes.hpp"

namespace comviewer {

/// Everything one anonymous viewer has built up. Callers hold `mutex`
/// while reading or writing any field.
struct Session {
  explicit Session(std::string session_id, Palette palette = {});

  std::string id;
  std::int64_t created_at = 0;  // unix seconds
  std::string query;
  std::optional<Explorer> explorer;
  NoteBook notes;
  std::map<std::string, QuestionBoard> boards;
  std::map<std::string, llm::SummaryDoc> summaries;  // by folder color
  std::map<std::string, llm::MindMap> mindmaps;      // by folder color
  std::size_t next_board = 1;

  std::mutex mutex;
};

inline constexpr int kSessionFormatVersion = 1;

/// Versioned JSON document with highlights, folders, boards, summaries and
/// mind maps. View state is not persisted.
std::string export_session(const Session& session);
/// Replaces the session's notes and boards with the document's. Throws
/// BadRequest on malformed documents or unsupported versions.
void import_session(Session& session, std::string_view document);
/// Session id stored in a document, without importing it.
std::string session_id_of(std::string_view document);

/// 128 random bits, hex encoded.
std::string new_session_id();

/// In-memory sessions backed by one `<id>.json` file each.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir, Palette palette = {});

  std::shared_ptr<Session> create();
  /// Looks in memory, then on disk. Throws NotFound.
  std::shared_ptr<Session> get(const std::string& id);
  /// Writes the session file. Caller holds the session mutex.
  void persist(const Session& session) const;
  /// Imports a document as a new in-memory session under its stored id.
  std::shared_ptr<Session> import_document(std::string_view document);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  Palette palette_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace comviewer
