#include "comviewer/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <set>
#include <stdexcept>

#include "comviewer/error.hpp"
#include "comviewer/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace comviewer::llm {
namespace {

std::string strip_trailing(std::string_view s, std::string_view chars) {
  s = text::trim(s);
  while (!s.empty() && chars.find(s.back()) != std::string_view::npos) {
    s.remove_suffix(1);
    s = text::trim(s);
  }
  return std::string(s);
}

// Drops LaTeX/markdown emphasis and heading marks so the marker scan sees
// plain "Title:" / "Subtitle:" / "Content:" words.
std::string normalize_markup(std::string_view response) {
  static const std::regex latex_bold(R"(\\text(?:bf|it)\{([^}]*)\})");
  static const std::regex heading(R"((^|\n)[ \t]*#+[ \t]*)");
  std::string s = std::regex_replace(std::string(response), latex_bold, "$1");
  s = std::regex_replace(s, heading, "$1");
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((s[i] == '*' || s[i] == '_') && i + 1 < s.size() && s[i + 1] == s[i]) {
      ++i;
      continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

// Removes a dangling list marker ("2.", "-", "*") left at the end of a
// value by the next numbered line.
std::string strip_dangling_marker(std::string value) {
  static const std::regex dangling(R"((\s+|^)(\d+[.)]|[-*•])\s*$)");
  return std::regex_replace(value, dangling, "");
}

std::string join_entries(const std::vector<std::string>& entries) {
  std::string out;
  for (const auto& e : entries) {
    auto t = text::trim(e);
    if (t.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(t);
  }
  return out;
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path prefix without trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UpstreamError("malformed LLM_BASE_URL '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e{url.substr(0, path_start), path_start == std::string::npos ? "" : url.substr(path_start)};
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

}  // namespace

// --- templates --------------------------------------------------------------------

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto open = text.find('{', i);
    if (open == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    const auto close = text.find('}', open);
    if (close == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    out.append(text, i, open - i);
    const auto key = text.substr(open + 1, close - open - 1);
    auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument("no value for placeholder {" + key + "} in " + name);
    out.append(it->second);
    i = close + 1;
  }
  return out;
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> out;
  std::size_t i = 0;
  while ((i = text.find('{', i)) != std::string::npos) {
    const auto close = text.find('}', i);
    if (close == std::string::npos) break;
    out.push_back(text.substr(i + 1, close - i - 1));
    i = close + 1;
  }
  return out;
}

const PromptTemplate& summary_template() {
  static const PromptTemplate t{
      "summary",
      "Please summarize the suggestions: {suggestions} given and output the results organized with \"subtitle\" and "
      "\"content\" that is corresponding to the subtitle, format like:\"subtitle: Patience with Diagnosis; content: "
      "The patience with Diagnosis\", and return a title that describes all the content."};
  return t;
}

const PromptTemplate& questions_template() {
  static const PromptTemplate t{
      "questions",
      "As someone with mental health issues, please ask three questions about the {current statement} from three "
      "different perspectives: what, why and how to do."};
  return t;
}

const PromptTemplate& answer_template() {
  static const PromptTemplate t{
      "answer",
      "As someone with expertise in mental health, please provide a brief answer to the question.\n"
      "Question: {question}\n"
      "Selected text: {selected_text}"};
  return t;
}

std::string render_summary_prompt(const std::vector<std::string>& entries) {
  return summary_template().render({{"suggestions", join_entries(entries)}});
}

std::string render_questions_prompt(std::string_view selected_text, std::optional<std::string_view> context) {
  auto prompt = questions_template().render({{"current statement", std::string(text::trim(selected_text))}});
  if (context && !text::trim(*context).empty()) {
    prompt += kContextSuffix;
    prompt += text::trim(*context);
  }
  return prompt;
}

std::string render_answer_prompt(std::string_view question, std::string_view selected_text) {
  return answer_template().render(
      {{"question", std::string(text::trim(question))}, {"selected_text", std::string(text::trim(selected_text))}});
}

// --- providers ------------------------------------------------------------------------

ProviderConfig ProviderConfig::from_env() {
  ProviderConfig c;
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  c.base_url = env("LLM_BASE_URL");
  if (c.base_url.empty()) c.base_url = "stub:";
  c.api_key = env("LLM_API_KEY");
  if (auto m = env("LLM_MODEL"); !m.empty()) c.model = m;
  return c;
}

std::string StubChatProvider::default_response(const std::string& prompt) {
  if (prompt.starts_with("Please summarize")) {
    return "Title: Collected Suggestions\n\n"
           "Subtitle: Calming Activities\n"
           "Content: Several entries recommend calming activities such as music, tea or gentle exercise to ease "
           "anxious moments.\n\n"
           "Subtitle: Rest and Routine\n"
           "Content: Other entries point to steady routines around sleep and rest as a way to feel more in control.";
  }
  if (prompt.starts_with("As someone with mental health issues")) {
    return "Question1: What does this suggestion involve in daily practice?\n\n"
           "Question2: Why might this approach reduce anxiety?\n\n"
           "Question3: How can I start applying it safely?";
  }
  if (prompt.starts_with("As someone with expertise in mental health")) {
    return "Start small and practice the technique regularly, for example a few minutes of slow breathing or "
           "progressive muscle relaxation each day. If symptoms persist or get worse, talk to a mental health "
           "professional.";
  }
  return "OK";
}

std::string StubChatProvider::complete(const std::string& prompt) {
  ++calls_;
  return responder_ ? responder_(prompt) : default_response(prompt);
}

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {}

std::string HttpChatProvider::complete(const std::string& prompt) {
  const auto endpoint = split_url(config_.base_url);
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);

  nlohmann::json body{{"model", config_.model},
                      {"temperature", config_.temperature},
                      {"max_tokens", config_.max_tokens},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(endpoint.path + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw UpstreamError("LLM provider unreachable", httplib::to_string(res.error()));
  if (res->status != 200) throw UpstreamError("LLM provider returned HTTP " + std::to_string(res->status), res->body);

  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw UpstreamError("LLM provider returned invalid JSON");
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw UpstreamError("LLM response has no choices[0].message.content", e.what());
  }
}

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config) {
  if (config.base_url.starts_with("stub:")) return std::make_unique<StubChatProvider>();
  return std::make_unique<HttpChatProvider>(config);
}

// --- summary ---------------------------------------------------------------------------

std::optional<SummaryDoc> parse_summary(std::string_view response) {
  static const std::regex marker(R"((^|[^A-Za-z])(subtitle|title|content)[ \t]*[:：])", std::regex::icase);
  const std::string s = normalize_markup(response);

  struct Hit {
    std::string kind;
    std::size_t value_begin;
    std::size_t marker_begin;
  };
  std::vector<Hit> hits;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), marker); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    hits.push_back({text::to_lower(m[2].str()), static_cast<std::size_t>(m.position(0) + m.length(0)),
                    static_cast<std::size_t>(m.position(2))});
  }

  SummaryDoc doc;
  bool have_title = false;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto end = i + 1 < hits.size() ? hits[i + 1].marker_begin : s.size();
    std::string value = strip_dangling_marker(std::string(s.substr(hits[i].value_begin, end - hits[i].value_begin)));
    if (hits[i].kind == "title") {
      if (!have_title) doc.title = strip_trailing(value, ";.,");
      have_title = true;
    } else if (hits[i].kind == "subtitle") {
      doc.sections.push_back({strip_trailing(value, ";.,"), ""});
    } else {
      auto content = strip_trailing(value, ";,");
      if (doc.sections.empty()) doc.sections.push_back({"", ""});
      auto& cur = doc.sections.back().content;
      if (!cur.empty()) cur.push_back(' ');
      cur += content;
    }
  }
  std::erase_if(doc.sections, [](const SummarySection& sec) { return sec.subtitle.empty() && sec.content.empty(); });
  const bool any_subtitle = std::any_of(doc.sections.begin(), doc.sections.end(),
                                        [](const SummarySection& sec) { return !sec.subtitle.empty(); });
  if (!any_subtitle) return std::nullopt;
  if (doc.title.empty()) doc.title = "Summary";
  return doc;
}

SummaryOutcome summarize(const std::vector<std::string>& entries, const std::string& color, ChatProvider& provider,
                         const std::optional<SummaryDoc>& previous) {
  SummaryOutcome out;
  const bool has_content = std::any_of(entries.begin(), entries.end(),
                                       [](const std::string& e) { return !text::trim(e).empty(); });
  if (!has_content) {
    out.doc.source_color = color;
    return out;
  }

  auto fail = [&](std::string why) {
    if (previous) {
      out.doc = *previous;
    } else {
      out.doc = SummaryDoc{};
    }
    out.doc.source_color = color;
    out.doc.stale = true;
    out.error = std::move(why);
    return out;
  };

  const std::string prompt = render_summary_prompt(entries);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      ++out.attempts;
      reply = provider.complete(attempt == 0 ? prompt : prompt + std::string(kSummaryRetrySuffix));
    } catch (const std::exception& e) {
      return fail(std::string("summary provider failed: ") + e.what());
    }
    if (auto doc = parse_summary(reply)) {
      out.doc = std::move(*doc);
      out.doc.source_color = color;
      out.doc.stale = false;
      return out;
    }
  }
  return fail("summary response could not be parsed after one retry");
}

// --- mind map ------------------------------------------------------------------------------

MindMap derive_mindmap(const SummaryDoc& summary, const std::optional<MindMap>& previous) {
  MindMap map;
  map.root = summary.title;
  for (const auto& sec : summary.sections) {
    if (sec.subtitle.empty()) continue;
    map.nodes.push_back({sec.subtitle, false, {}});
  }
  if (!previous) return map;

  auto user_only = [](const std::vector<MindMapNode>& nodes) {
    std::vector<MindMapNode> kept;
    for (const auto& n : nodes)
      if (n.user_added) kept.push_back(n);
    return kept;
  };
  for (const auto& old : previous->nodes) {
    if (old.user_added) {
      map.nodes.push_back(old);
      continue;
    }
    auto it = std::find_if(map.nodes.begin(), map.nodes.end(),
                           [&](const MindMapNode& n) { return !n.user_added && n.label == old.label; });
    if (it == map.nodes.end()) continue;
    for (auto& child : user_only(old.children)) it->children.push_back(std::move(child));
  }
  return map;
}

// --- questions ---------------------------------------------------------------------------------

const std::vector<std::string>& fallback_questions() {
  static const std::vector<std::string> q{"What does this suggestion involve in practice?",
                                          "Why might this help with anxiety?",
                                          "How can I start doing this safely?"};
  return q;
}

std::vector<std::string> parse_questions(std::string_view response) {
  static const std::regex prefix(R"(^\s*(?:(?:question|q)\s*\d*\s*[:.)\-]|\d+\s*[.):\-]|[-*•])\s*)", std::regex::icase);
  const std::string s = normalize_markup(response);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    std::string line = s.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    start = nl == std::string::npos ? s.size() + 1 : nl + 1;

    std::smatch m;
    const bool marked = std::regex_search(line, m, prefix);
    std::string body = marked ? line.substr(static_cast<std::size_t>(m.length(0))) : line;
    body = std::string(text::trim(body));
    if (body.empty()) continue;
    if (marked || body.back() == '?') out.push_back(std::move(body));
  }
  return out;
}

QuestionSet recommend_questions(std::string_view selected_text, std::optional<std::string_view> context,
                                ChatProvider& provider) {
  if (text::trim(selected_text).empty()) throw BadRequest("selected text is empty");
  QuestionSet set;
  set.questions = parse_questions(provider.complete(render_questions_prompt(selected_text, context)));
  if (set.questions.size() > 3) set.questions.resize(3);
  for (std::size_t i = set.questions.size(); i < 3; ++i) {
    set.questions.push_back(fallback_questions()[i]);
    set.degraded = true;
  }
  return set;
}

std::string answer(std::string_view question, std::string_view selected_text, ChatProvider& provider) {
  if (text::trim(question).empty()) throw BadRequest("question is empty");
  return std::string(text::trim(provider.complete(render_answer_prompt(question, selected_text))));
}

}  // namespace comviewer::llm
