#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "drhai/argumentation.hpp"
#include "drhai/formula.hpp"
#include "drhai/sat.hpp"

namespace drhai {

enum class Agent { Explainee, Explainer };
enum class Locution { Query, Support, Refute, AgreeToDisagree };

Agent other(Agent a);
std::string_view to_string(Agent a);
std::string_view to_string(Locution l);
Agent parse_agent(std::string_view text);
Locution parse_locution(std::string_view text);

/// m_t = <agent, locution, content>. Query carries only a target; support
/// and refute carry the target and the argument; agree-to-disagree carries
/// nothing.
struct Move {
  std::size_t t = 0;
  Agent agent = Agent::Explainee;
  Locution locution = Locution::AgreeToDisagree;
  std::optional<Formula> target;
  std::optional<Argument> argument;

  static Move query(Formula target);
  static Move support(Formula target, Argument a);
  static Move refute(Agent agent, Formula target, Argument a);
  static Move agree(Agent agent);

  friend bool operator==(const Move& a, const Move& b);
};

struct Commitment {
  std::size_t t = 0;
  Locution kind = Locution::AgreeToDisagree;
  std::optional<Formula> query;
  std::optional<Argument> argument;
};

/// Append-only log of one agent's utterances.
class CommitmentStore {
 public:
  void append(Commitment c);

  const std::vector<Commitment>& entries() const { return entries_; }
  std::vector<Argument> arguments() const;
  bool has_argument(const Argument& a) const;
  bool queried(const Formula& f) const { return queried_.contains(f); }
  /// Premises and claims of committed arguments, plus queried formulas.
  const std::set<Formula>& uttered() const { return uttered_; }
  /// Premises and claims only, in first-utterance order.
  const std::vector<Formula>& argument_formulas() const { return argument_formulas_; }

 private:
  std::vector<Commitment> entries_;
  std::set<Formula> uttered_;
  std::set<Formula> queried_;
  std::vector<Formula> argument_formulas_;
};

/// Where counterargument premises may come from: the agent's own knowledge
/// base, or that plus the formulas the opponent has committed to.
enum class SourceMode { Pure, Mixed };

struct DialogueOptions {
  /// Sources admitted by the protocol for refute moves. Agree-to-disagree is
  /// legal only when no refute from these sources exists.
  SourceMode protocol_sources = SourceMode::Pure;
  /// The explainee may close the dialogue at any point (interactive play).
  bool explainee_may_concede = false;
  /// Per solver call.
  sat::Budget budget{};
};

namespace detail {
struct DialogueContext;
}

/// Immutable snapshot of a dialogue; apply_move returns a new one.
class DialogueState {
 public:
  /// Empty dialogue. Throws PreconditionError when a knowledge base is
  /// unsatisfiable, the topic is empty, or a topic formula is not entailed
  /// by kb_r or is already entailed by kb_e.
  static DialogueState start(KnowledgeBase kb_r, KnowledgeBase kb_e, std::vector<Formula> topic,
                             DialogueOptions options = {});

  const KnowledgeBase& kb(Agent a) const;
  const KnowledgeBase& kb_r() const { return kb(Agent::Explainer); }
  const KnowledgeBase& kb_e() const { return kb(Agent::Explainee); }
  const std::vector<Formula>& topic() const;
  const DialogueOptions& options() const;

  const std::vector<Move>& history() const { return history_; }
  const CommitmentStore& store(Agent a) const { return a == Agent::Explainee ? cs_e_ : cs_r_; }
  std::size_t next_timestep() const { return history_.size() + 1; }
  Agent agent_to_move() const;
  bool terminated() const { return terminated_; }

  /// Whether kb_e entails f (cached per dialogue).
  bool explainee_entails(const Formula& f) const;
  /// Whether the agent's own knowledge base entails f (cached).
  bool agent_entails(Agent a, const Formula& f) const;

 private:
  friend DialogueState apply_move(const DialogueState&, const Move&);
  friend DialogueState commit_move(const DialogueState&, Move);

  std::shared_ptr<detail::DialogueContext> ctx_;
  std::vector<Move> history_;
  CommitmentStore cs_e_;
  CommitmentStore cs_r_;
  bool terminated_ = false;
};

struct Strategy {
  std::vector<Locution> priorities;
  SourceMode sources = SourceMode::Pure;

  static Strategy explainee_default();
  static Strategy explainer_default();
};

struct Strategies {
  Strategy explainee = Strategy::explainee_default();
  Strategy explainer = Strategy::explainer_default();

  const Strategy& of(Agent a) const { return a == Agent::Explainee ? explainee : explainer; }
};

/// Counterargument source for `agent` under `mode`: its knowledge base,
/// followed (mixed mode) by the opponent's committed premises and claims.
std::vector<Formula> refute_source(const DialogueState& s, Agent agent, SourceMode mode);

struct LegalMoveQuery {
  SourceMode sources = SourceMode::Mixed;
  /// Arguments listed per support/refute target; the default lists all.
  std::size_t per_target_limit = static_cast<std::size_t>(-1);
};

/// Every move whose protocol preconditions hold. Refute sources follow
/// `q.sources` (restricted to what the dialogue's protocol admits).
std::vector<Move> legal_moves(const DialogueState& s, Agent agent, const LegalMoveQuery& q = {});

/// Name of the first violated precondition, or nullopt when legal.
std::optional<std::string> violated_precondition(const DialogueState& s, const Move& m);

/// Validates, then appends. Throws ProtocolError naming the violated
/// precondition.
DialogueState apply_move(const DialogueState& s, const Move& m);

/// Appends without validation. For callers that produced the move with
/// next_move on the same state.
DialogueState commit_move(const DialogueState& s, Move m);

/// The move chosen by the ordered strategy. Never fails: agree-to-disagree
/// is the fallback.
Move next_move(const DialogueState& s, Agent agent, const Strategy& strategy);

struct DialogueStats {
  double seconds = 0.0;  // time spent choosing moves
  std::size_t moves = 0;
};

std::size_t default_move_budget(const KnowledgeBase& kb_r, const KnowledgeBase& kb_e);

/// Opens with query(topic[0]) and alternates next_move until the explainee
/// agrees to disagree. Throws BudgetExceeded when more than `move_budget`
/// moves would be needed.
DialogueState run_dialogue(const KnowledgeBase& kb_r, const KnowledgeBase& kb_e,
                           const std::vector<Formula>& topic, const Strategies& strategies = {},
                           std::optional<std::size_t> move_budget = std::nullopt,
                           const DialogueOptions& options = {}, DialogueStats* stats = nullptr);

/// Continues `s` with the strategies until it terminates.
DialogueState run_to_end(DialogueState s, const Strategies& strategies, std::size_t move_budget,
                         DialogueStats* stats = nullptr);

/// Terminated, and every move after the first is what the strategy picks on
/// the prefix before it.
bool is_well_formed(const DialogueState& d, const Strategies& strategies = {});

/// Rebuilds a dialogue from a move list, validating each move.
DialogueState replay(const DialogueState& empty, const std::vector<Move>& moves);

}  // namespace drhai
