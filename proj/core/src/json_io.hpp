#pragma once

// JSON mappings shared by the session file and the HTTP payloads.

#include "comviewer/board.hpp"
#include "comviewer/error.hpp"
#include "comviewer/labeling.hpp"
#include "comviewer/llm.hpp"
#include "comviewer/notes.hpp"
#include "json.hpp"

namespace comviewer::json_io {

using nlohmann::json;

inline json labels_json(const LabelPair& l) {
  return json{{"emotional", std::string(to_string(l.emotional))},
              {"informational", std::string(to_string(l.informational))}};
}

inline json anchor_json(const Anchor& a) {
  return json{{"target", a.target}, {"char_start", a.char_start}, {"char_end", a.char_end}, {"exact_text", a.exact_text}};
}

inline json highlight_json(const Highlight& h) {
  json j{{"id", h.id}, {"anchor", anchor_json(h.anchor)}, {"color", h.color}, {"created_at", h.created_at},
         {"edited_text", nullptr}, {"display_text", h.display_text()}};
  if (h.edited_text) j["edited_text"] = *h.edited_text;
  return j;
}

inline Highlight highlight_from(const json& j) {
  Highlight h;
  h.id = j.at("id").get<std::string>();
  const auto& a = j.at("anchor");
  h.anchor = Anchor{a.at("target").get<std::string>(), a.at("char_start").get<std::size_t>(),
                    a.at("char_end").get<std::size_t>(), a.at("exact_text").get<std::string>()};
  h.color = j.at("color").get<std::string>();
  h.created_at = j.at("created_at").get<std::uint64_t>();
  if (j.contains("edited_text") && j["edited_text"].is_string()) h.edited_text = j["edited_text"].get<std::string>();
  return h;
}

inline json summary_json(const llm::SummaryDoc& s) {
  json sections = json::array();
  for (const auto& sec : s.sections) sections.push_back({{"subtitle", sec.subtitle}, {"content", sec.content}});
  return json{{"title", s.title}, {"sections", sections}, {"source_color", s.source_color}, {"stale", s.stale}};
}

inline llm::SummaryDoc summary_from(const json& j) {
  llm::SummaryDoc s;
  s.title = j.at("title").get<std::string>();
  for (const auto& sec : j.at("sections"))
    s.sections.push_back({sec.at("subtitle").get<std::string>(), sec.at("content").get<std::string>()});
  s.source_color = j.at("source_color").get<std::string>();
  s.stale = j.at("stale").get<bool>();
  return s;
}

inline json mindmap_node_json(const llm::MindMapNode& n) {
  json children = json::array();
  for (const auto& c : n.children) children.push_back(mindmap_node_json(c));
  return json{{"label", n.label}, {"user_added", n.user_added}, {"children", children}};
}

inline llm::MindMapNode mindmap_node_from(const json& j) {
  llm::MindMapNode n{j.at("label").get<std::string>(), j.at("user_added").get<bool>(), {}};
  for (const auto& c : j.at("children")) n.children.push_back(mindmap_node_from(c));
  return n;
}

inline json mindmap_json(const llm::MindMap& m) {
  json nodes = json::array();
  for (const auto& n : m.nodes) nodes.push_back(mindmap_node_json(n));
  return json{{"root", m.root}, {"nodes", nodes}};
}

inline llm::MindMap mindmap_from(const json& j) {
  llm::MindMap m;
  m.root = j.at("root").get<std::string>();
  for (const auto& n : j.at("nodes")) m.nodes.push_back(mindmap_node_from(n));
  return m;
}

inline json question_node_json(const QuestionNode& n) {
  json children = json::array();
  for (const auto& c : n.children) children.push_back(question_node_json(c));
  return json{{"id", n.id},
              {"question", n.question},
              {"answer", n.answer},
              {"origin", std::string(to_string(n.origin))},
              {"state", std::string(to_string(n.state))},
              {"error", n.error},
              {"recommendations", n.recommendations},
              {"recommendations_stale", n.recommendations_stale},
              {"children", children}};
}

inline QuestionNode question_node_from(const json& j) {
  QuestionNode n;
  n.id = j.at("id").get<std::string>();
  n.question = j.at("question").get<std::string>();
  n.answer = j.at("answer").get<std::string>();
  n.origin = j.at("origin").get<std::string>() == "recommended" ? QuestionOrigin::recommended : QuestionOrigin::user;
  const auto state = j.at("state").get<std::string>();
  n.state = state == "answered" ? AnswerState::answered : state == "error" ? AnswerState::error : AnswerState::pending;
  n.error = j.value("error", std::string{});
  n.recommendations = j.value("recommendations", std::vector<std::string>{});
  n.recommendations_stale = j.value("recommendations_stale", false);
  for (const auto& c : j.at("children")) n.children.push_back(question_node_from(c));
  return n;
}

inline json board_json(const QuestionBoard& b) {
  json threads = json::array();
  for (const auto& t : b.threads()) threads.push_back(question_node_json(t));
  return json{{"id", b.id()},
              {"selected_text", b.selected_text()},
              {"target", b.target()},
              {"recommended", b.recommended()},
              {"degraded", b.degraded()},
              {"collapsed", b.collapsed()},
              {"threads", threads}};
}

inline QuestionBoard board_from(const json& j) {
  std::vector<QuestionNode> threads;
  for (const auto& t : j.at("threads")) threads.push_back(question_node_from(t));
  return QuestionBoard::restore(j.at("id").get<std::string>(), j.at("selected_text").get<std::string>(),
                                j.value("target", std::string{}), j.value("recommended", std::vector<std::string>{}),
                                j.value("degraded", false), j.value("collapsed", false), std::move(threads));
}

}  // namespace comviewer::json_io
