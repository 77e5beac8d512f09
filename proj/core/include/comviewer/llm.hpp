#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace comviewer::llm {

// --- prompts ------------------------------------------------------------------

/// A prompt with `{name}` placeholders. Rendering replaces each placeholder
/// site and leaves every other byte untouched.
struct PromptTemplate {
  std::string name;
  std::string text;

  /// Throws std::invalid_argument when a placeholder has no value.
  std::string render(const std::map<std::string, std::string>& values) const;
  std::vector<std::string> placeholders() const;
};

const PromptTemplate& summary_template();    // {suggestions}
const PromptTemplate& questions_template();  // {current statement}
const PromptTemplate& answer_template();     // {question}, {selected_text}

/// Suffix appended to a question prompt when a prior answer is available.
inline constexpr std::string_view kContextSuffix = "\nPrevious answer: ";
/// Suffix appended on the single retry after an unparseable summary.
inline constexpr std::string_view kSummaryRetrySuffix =
    "\nPlease answer again using exactly this layout: one line \"Title: ...\", then for each point a line "
    "\"Subtitle: ...\" followed by a line \"Content: ...\".";

std::string render_summary_prompt(const std::vector<std::string>& entries);
std::string render_questions_prompt(std::string_view selected_text, std::optional<std::string_view> context);
std::string render_answer_prompt(std::string_view question, std::string_view selected_text);

// --- providers ------------------------------------------------------------------

struct ProviderConfig {
  std::string base_url;  // "stub:" selects the offline stub
  std::string api_key;
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 512;
  int timeout_seconds = 30;

  /// LLM_BASE_URL, LLM_API_KEY, LLM_MODEL; base URL defaults to "stub:".
  static ProviderConfig from_env();
};

/// Chat-completion backend. complete() throws UpstreamError on failure.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string name() const = 0;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Offline deterministic provider. Recognizes the three prompt kinds by
/// their opening words and returns fixed responses; a custom responder can
/// replace that for tests.
class StubChatProvider final : public ChatProvider {
 public:
  using Responder = std::function<std::string(const std::string& prompt)>;

  StubChatProvider() = default;
  explicit StubChatProvider(Responder responder) : responder_(std::move(responder)) {}

  std::string name() const override { return "stub"; }
  std::string complete(const std::string& prompt) override;

  std::size_t calls() const { return calls_.load(); }
  static std::string default_response(const std::string& prompt);

 private:
  Responder responder_;
  std::atomic<std::size_t> calls_{0};
};

/// OpenAI-style POST {base_url}/chat/completions.
class HttpChatProvider final : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig config);

  std::string name() const override { return "http:" + config_.model; }
  std::string complete(const std::string& prompt) override;

 private:
  ProviderConfig config_;
};

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config);

// --- summary ----------------------------------------------------------------------

struct SummarySection {
  std::string subtitle;
  std::string content;

  bool operator==(const SummarySection&) const = default;
};

struct SummaryDoc {
  std::string title;
  std::vector<SummarySection> sections;
  std::string source_color;
  bool stale = false;

  bool operator==(const SummaryDoc&) const = default;
};

/// Accepts "Title:/Subtitle:/Content:" markers in any case, with optional
/// markdown or LaTeX bold around the marker, numbered or bulleted lines,
/// and the single-line "subtitle: X; content: Y" layout. Returns nullopt
/// when no section is found.
std::optional<SummaryDoc> parse_summary(std::string_view response);

struct SummaryOutcome {
  SummaryDoc doc;
  std::optional<std::string> error;  // set when the provider failed or the output never parsed
  std::size_t attempts = 0;          // provider calls made
};

/// Summarizes folder entries (edited text if present, else the span).
/// Empty input makes no call. On failure the previous summary is returned
/// marked stale, together with the error.
SummaryOutcome summarize(const std::vector<std::string>& entries, const std::string& color, ChatProvider& provider,
                         const std::optional<SummaryDoc>& previous = std::nullopt);

// --- mind map -----------------------------------------------------------------------

struct MindMapNode {
  std::string label;
  bool user_added = false;
  std::vector<MindMapNode> children;

  bool operator==(const MindMapNode&) const = default;
};

struct MindMap {
  std::string root;
  std::vector<MindMapNode> nodes;  // first level: one per summary subtitle, plus user nodes

  bool operator==(const MindMap&) const = default;
};

/// Root = title, first level = subtitles in order. User-added nodes from
/// `previous` survive: children of a subtitle node move to the new node
/// with the same label, and user-added first-level nodes are appended.
MindMap derive_mindmap(const SummaryDoc& summary, const std::optional<MindMap>& previous = std::nullopt);

// --- questions and answers ----------------------------------------------------------

struct QuestionSet {
  std::vector<std::string> questions;  // exactly 3
  bool degraded = false;               // padded from the fallback set
};

/// Extracts question lines ("Question1: ...", "1. ...", "- ...", or lines
/// ending in '?').
std::vector<std::string> parse_questions(std::string_view response);

/// Fallback questions used to pad short responses, one per perspective.
const std::vector<std::string>& fallback_questions();

/// Throws BadRequest for a blank selection before calling the provider.
QuestionSet recommend_questions(std::string_view selected_text, std::optional<std::string_view> context,
                                ChatProvider& provider);

/// Throws BadRequest for a blank question.
std::string answer(std::string_view question, std::string_view selected_text, ChatProvider& provider);

}  // namespace comviewer::llm
