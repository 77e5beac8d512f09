#include "comviewer/board.hpp"

#include <functional>

#include "comviewer/error.hpp"
#include "comviewer/text.hpp"

namespace comviewer {

std::string_view to_string(QuestionOrigin o) { return o == QuestionOrigin::recommended ? "recommended" : "user"; }

std::string_view to_string(AnswerState s) {
  switch (s) {
    case AnswerState::pending: return "pending";
    case AnswerState::answered: return "answered";
    case AnswerState::error: return "error";
  }
  return "pending";
}

namespace {

template <typename Node, typename Fn>
bool walk(std::vector<Node>& nodes, Fn&& fn) {
  for (auto& n : nodes) {
    if (fn(n)) return true;
    if (walk(n.children, fn)) return true;
  }
  return false;
}

bool find_path(const std::vector<QuestionNode>& nodes, const std::string& id, std::vector<std::string>& path) {
  for (const auto& n : nodes) {
    path.push_back(n.id);
    if (n.id == id || find_path(n.children, id, path)) return true;
    path.pop_back();
  }
  return false;
}

}  // namespace

QuestionBoard::QuestionBoard(std::string id, std::string selected_text, std::string target)
    : id_(std::move(id)), selected_text_(std::move(selected_text)), target_(std::move(target)) {
  if (text::trim(selected_text_).empty()) throw BadRequest("selected text is empty");
}

void QuestionBoard::set_recommended(std::vector<std::string> questions, bool degraded) {
  recommended_ = std::move(questions);
  degraded_ = degraded;
}

std::string QuestionBoard::next_node_id() { return "q" + std::to_string(next_node_++); }

QuestionNode& QuestionBoard::add_thread(std::string question, QuestionOrigin origin) {
  if (text::trim(question).empty()) throw BadRequest("question is empty");
  QuestionNode n;
  n.id = next_node_id();
  n.question = std::move(question);
  n.origin = origin;
  threads_.push_back(std::move(n));
  return threads_.back();
}

QuestionNode& QuestionBoard::branch(const std::string& parent_id, std::string question, QuestionOrigin origin) {
  if (text::trim(question).empty()) throw BadRequest("question is empty");
  QuestionNode* parent = find(parent_id);
  if (!parent) throw NotFound("unknown question node: " + parent_id);
  QuestionNode n;
  n.id = next_node_id();
  n.question = std::move(question);
  n.origin = origin;
  parent->children.push_back(std::move(n));
  return parent->children.back();
}

QuestionNode* QuestionBoard::find(const std::string& node_id) {
  QuestionNode* hit = nullptr;
  walk(threads_, [&](QuestionNode& n) {
    if (n.id != node_id) return false;
    hit = &n;
    return true;
  });
  return hit;
}

const QuestionNode* QuestionBoard::find(const std::string& node_id) const {
  return const_cast<QuestionBoard*>(this)->find(node_id);
}

std::vector<std::string> QuestionBoard::path_to(const std::string& node_id) const {
  std::vector<std::string> path;
  if (!find_path(threads_, node_id, path)) path.clear();
  return path;
}

void QuestionBoard::edit_answer(const std::string& node_id, std::string text_in) {
  QuestionNode* n = find(node_id);
  if (!n) throw NotFound("unknown question node: " + node_id);
  n->answer = std::move(text_in);
  n->state = AnswerState::answered;
  n->recommendations_stale = true;
}

void QuestionBoard::resolve(const std::string& node_id, llm::ChatProvider& provider) {
  QuestionNode* n = find(node_id);
  if (!n) throw NotFound("unknown question node: " + node_id);
  try {
    n->answer = llm::answer(n->question, selected_text_, provider);
    n->state = AnswerState::answered;
    n->error.clear();
  } catch (const BadRequest&) {
    throw;
  } catch (const std::exception& e) {
    n->state = AnswerState::error;
    n->error = e.what();
    return;
  }
  // Follow-ups build on the (possibly later edited) answer.
  try {
    auto follow = llm::recommend_questions(selected_text_, n->answer, provider);
    n->recommendations = std::move(follow.questions);
    n->recommendations_stale = false;
  } catch (const std::exception&) {
    n->recommendations_stale = true;
  }
}

std::size_t QuestionBoard::node_count() const {
  std::size_t count = 0;
  std::function<void(const std::vector<QuestionNode>&)> visit = [&](const std::vector<QuestionNode>& nodes) {
    for (const auto& n : nodes) {
      ++count;
      visit(n.children);
    }
  };
  visit(threads_);
  return count;
}

QuestionBoard QuestionBoard::restore(std::string id, std::string selected_text, std::string target,
                                     std::vector<std::string> recommended, bool degraded, bool collapsed,
                                     std::vector<QuestionNode> threads) {
  QuestionBoard b(std::move(id), std::move(selected_text), std::move(target));
  b.recommended_ = std::move(recommended);
  b.degraded_ = degraded;
  b.collapsed_ = collapsed;
  b.threads_ = std::move(threads);
  std::size_t max_id = 0;
  walk(b.threads_, [&](QuestionNode& n) {
    if (n.id.size() > 1 && n.id[0] == 'q') {
      try {
        max_id = std::max<std::size_t>(max_id, std::stoull(n.id.substr(1)));
      } catch (const std::exception&) {
      }
    }
    return false;
  });
  b.next_node_ = max_id + 1;
  return b;
}

}  // namespace comviewer
