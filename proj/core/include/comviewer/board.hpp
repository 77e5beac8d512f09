#pragma once

#include <optional>
#include <string>
#include <vector>

#include "comviewer/llm.hpp"

namespace comviewer {

enum class QuestionOrigin { recommended, user };
std::string_view to_string(QuestionOrigin o);

enum class AnswerState { pending, answered, error };
std::string_view to_string(AnswerState s);

struct QuestionNode {
  std::string id;
  std::string question;
  std::string answer;
  QuestionOrigin origin = QuestionOrigin::user;
  AnswerState state = AnswerState::pending;
  std::string error;                          // set when state == error
  std::vector<std::string> recommendations;   // follow-ups built on the answer
  bool recommendations_stale = false;
  std::vector<QuestionNode> children;

  bool operator==(const QuestionNode&) const = default;
};

/// A branching question/answer tree seeded by one selected span. Chains of
/// single children render vertically and siblings horizontally; that is a
/// client concern.
class QuestionBoard {
 public:
  QuestionBoard() = default;
  QuestionBoard(std::string id, std::string selected_text, std::string target = {});

  const std::string& id() const { return id_; }
  const std::string& selected_text() const { return selected_text_; }
  const std::string& target() const { return target_; }
  const std::vector<QuestionNode>& threads() const { return threads_; }
  const std::vector<std::string>& recommended() const { return recommended_; }
  bool degraded() const { return degraded_; }
  bool collapsed() const { return collapsed_; }

  void set_recommended(std::vector<std::string> questions, bool degraded);
  void set_collapsed(bool c) { collapsed_ = c; }

  /// New root thread. Throws BadRequest on a blank question.
  QuestionNode& add_thread(std::string question, QuestionOrigin origin);
  /// New child under `parent_id`. Throws NotFound for unknown parents.
  QuestionNode& branch(const std::string& parent_id, std::string question, QuestionOrigin origin);

  QuestionNode* find(const std::string& node_id);
  const QuestionNode* find(const std::string& node_id) const;
  /// Path of node ids from a root to `node_id`; empty when absent.
  std::vector<std::string> path_to(const std::string& node_id) const;

  /// User edit of an answer; follow-up recommendations become stale.
  void edit_answer(const std::string& node_id, std::string text);

  /// Asks the provider for the node's answer and follow-up recommendations.
  /// Provider failures leave the node in the error state and do not throw.
  void resolve(const std::string& node_id, llm::ChatProvider& provider);

  std::size_t node_count() const;

  /// Rebuilds a board from stored state (session import).
  static QuestionBoard restore(std::string id, std::string selected_text, std::string target,
                               std::vector<std::string> recommended, bool degraded, bool collapsed,
                               std::vector<QuestionNode> threads);

  bool operator==(const QuestionBoard&) const = default;

 private:
  std::string next_node_id();

  std::string id_;
  std::string selected_text_;
  std::string target_;
  std::vector<std::string> recommended_;
  bool degraded_ = false;
  bool collapsed_ = false;
  std::vector<QuestionNode> threads_;
  std::size_t next_node_ = 1;
};

}  // namespace comviewer
