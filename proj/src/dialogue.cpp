#include "drhai/dialogue.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>

#include "drhai/entailment.hpp"
#include "drhai/errors.hpp"

namespace drhai {

Agent other(Agent a) { return a == Agent::Explainee ? Agent::Explainer : Agent::Explainee; }

std::string_view to_string(Agent a) { return a == Agent::Explainee ? "explainee" : "explainer"; }

std::string_view to_string(Locution l) {
  switch (l) {
    case Locution::Query: return "query";
    case Locution::Support: return "support";
    case Locution::Refute: return "refute";
    case Locution::AgreeToDisagree: return "agree-to-disagree";
  }
  return "?";
}

Agent parse_agent(std::string_view text) {
  if (text == "explainee" || text == "e") return Agent::Explainee;
  if (text == "explainer" || text == "r") return Agent::Explainer;
  throw Error("unknown agent '" + std::string(text) + "'");
}

Locution parse_locution(std::string_view text) {
  for (Locution l : {Locution::Query, Locution::Support, Locution::Refute,
                     Locution::AgreeToDisagree}) {
    if (to_string(l) == text) return l;
  }
  throw Error("unknown locution '" + std::string(text) + "'");
}

Move Move::query(Formula target) {
  Move m;
  m.agent = Agent::Explainee;
  m.locution = Locution::Query;
  m.target = std::move(target);
  return m;
}

Move Move::support(Formula target, Argument a) {
  Move m;
  m.agent = Agent::Explainer;
  m.locution = Locution::Support;
  m.target = std::move(target);
  m.argument = std::move(a);
  return m;
}

Move Move::refute(Agent agent, Formula target, Argument a) {
  Move m;
  m.agent = agent;
  m.locution = Locution::Refute;
  m.target = std::move(target);
  m.argument = std::move(a);
  return m;
}

Move Move::agree(Agent agent) {
  Move m;
  m.agent = agent;
  m.locution = Locution::AgreeToDisagree;
  return m;
}

bool operator==(const Move& a, const Move& b) {
  return a.t == b.t && a.agent == b.agent && a.locution == b.locution && a.target == b.target &&
         a.argument == b.argument;
}

// ---------------------------------------------------------------------------
// Commitment stores

void CommitmentStore::append(Commitment c) {
  if (!entries_.empty() && c.t <= entries_.back().t) {
    throw ProtocolError("commitment timesteps must increase");
  }
  if (c.query) {
    queried_.insert(*c.query);
    uttered_.insert(*c.query);
  }
  if (c.argument) {
    auto note = [this](const Formula& f) {
      if (std::find(argument_formulas_.begin(), argument_formulas_.end(), f) ==
          argument_formulas_.end()) {
        argument_formulas_.push_back(f);
      }
      uttered_.insert(f);
    };
    for (const auto& p : c.argument->premises) note(p);
    note(c.argument->claim);
  }
  entries_.push_back(std::move(c));
}

std::vector<Argument> CommitmentStore::arguments() const {
  std::vector<Argument> out;
  for (const auto& e : entries_) {
    if (e.argument) out.push_back(*e.argument);
  }
  return out;
}

bool CommitmentStore::has_argument(const Argument& a) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Commitment& e) { return e.argument && *e.argument == a; });
}

// ---------------------------------------------------------------------------
// Shared per-dialogue context

namespace detail {

class EntailmentCache {
 public:
  EntailmentCache(const KnowledgeBase& kb, const sat::Budget& budget) : ctx_(budget) {
    for (const auto& f : kb) ctx_.add_hard(f);
    consistent_ = ctx_.solve();
  }

  bool consistent() const { return consistent_; }

  bool entails(const Formula& f) {
    std::lock_guard lock(mu_);
    auto it = memo_.find(f);
    if (it != memo_.end()) return it->second;
    const sat::Lit assume[] = {~ctx_.literal_for(f)};
    const bool result = !ctx_.solve(assume);
    memo_.emplace(f, result);
    return result;
  }

 private:
  std::mutex mu_;
  SolveContext ctx_;
  bool consistent_ = false;
  std::map<Formula, bool> memo_;
};

struct DialogueContext {
  KnowledgeBase kb_r;
  KnowledgeBase kb_e;
  std::vector<Formula> topic;
  DialogueOptions options;
  std::unique_ptr<EntailmentCache> cache_r;
  std::unique_ptr<EntailmentCache> cache_e;
};

}  // namespace detail

DialogueState DialogueState::start(KnowledgeBase kb_r, KnowledgeBase kb_e,
                                   std::vector<Formula> topic, DialogueOptions options) {
  auto ctx = std::make_shared<detail::DialogueContext>();
  ctx->kb_r = std::move(kb_r);
  ctx->kb_e = std::move(kb_e);
  ctx->topic = std::move(topic);
  ctx->options = options;
  ctx->cache_r = std::make_unique<detail::EntailmentCache>(ctx->kb_r, options.budget);
  ctx->cache_e = std::make_unique<detail::EntailmentCache>(ctx->kb_e, options.budget);
  if (!ctx->cache_r->consistent()) throw PreconditionError("explainer knowledge base is unsatisfiable");
  if (!ctx->cache_e->consistent()) throw PreconditionError("explainee knowledge base is unsatisfiable");
  if (ctx->topic.empty()) throw PreconditionError("topic is empty");
  for (const auto& phi : ctx->topic) {
    const std::string name = "topic formula '" + format_formula(phi) + "'";
    if (!ctx->cache_r->entails(phi)) {
      throw PreconditionError(name + " is not entailed by the explainer knowledge base");
    }
    if (ctx->cache_e->entails(phi) && !ctx->cache_e->entails(complement(phi))) {
      throw PreconditionError(name + " is already entailed by the explainee knowledge base");
    }
  }
  DialogueState s;
  s.ctx_ = std::move(ctx);
  return s;
}

const KnowledgeBase& DialogueState::kb(Agent a) const {
  return a == Agent::Explainee ? ctx_->kb_e : ctx_->kb_r;
}
const std::vector<Formula>& DialogueState::topic() const { return ctx_->topic; }
const DialogueOptions& DialogueState::options() const { return ctx_->options; }

Agent DialogueState::agent_to_move() const {
  return history_.size() % 2 == 0 ? Agent::Explainee : Agent::Explainer;
}

bool DialogueState::explainee_entails(const Formula& f) const { return ctx_->cache_e->entails(f); }

bool DialogueState::agent_entails(Agent a, const Formula& f) const {
  return (a == Agent::Explainee ? ctx_->cache_e : ctx_->cache_r)->entails(f);
}

Strategy Strategy::explainee_default() {
  return {{Locution::Refute, Locution::Query, Locution::AgreeToDisagree}, SourceMode::Pure};
}

Strategy Strategy::explainer_default() {
  return {{Locution::Support, Locution::Refute, Locution::AgreeToDisagree}, SourceMode::Pure};
}

// ---------------------------------------------------------------------------
// Searches shared by legality and strategy

namespace {

const Move* last_move(const DialogueState& s) {
  return s.history().empty() ? nullptr : &s.history().back();
}

bool follows_explainer_agreement(const DialogueState& s) {
  const Move* m = last_move(s);
  return m && m->agent == Agent::Explainer && m->locution == Locution::AgreeToDisagree;
}

std::optional<Formula> pending_query(const DialogueState& s) {
  const Move* m = last_move(s);
  if (m && m->locution == Locution::Query) return m->target;
  return std::nullopt;
}

/// Query candidates: premises of the explainer's arguments, most recent
/// argument first, premises in written order.
std::vector<Formula> premise_targets(const DialogueState& s) {
  std::vector<Formula> out;
  const auto args = s.store(Agent::Explainer).arguments();
  for (auto it = args.rbegin(); it != args.rend(); ++it) {
    for (const auto& p : it->premises) {
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  }
  return out;
}

/// Refute targets: the opponent's arguments most recent first, claim then
/// premises. With `include_queries`, the opponent's queries follow.
std::vector<Formula> refute_targets(const DialogueState& s, Agent agent, bool include_queries) {
  std::vector<Formula> out;
  auto add = [&](const Formula& f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  const CommitmentStore& opp = s.store(other(agent));
  const auto& entries = opp.entries();
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (!it->argument) continue;
    add(it->argument->claim);
    for (const auto& p : it->argument->premises) add(p);
  }
  if (include_queries) {
    for (const auto& e : entries) {
      if (e.query) add(*e.query);
    }
  }
  return out;
}

bool query_precondition_3(const DialogueState& s, const Formula& phi) {
  return !s.explainee_entails(phi) || s.explainee_entails(complement(phi));
}

bool is_open_topic(const DialogueState& s, const Formula& phi) {
  const auto& topic = s.topic();
  return std::find(topic.begin(), topic.end(), phi) != topic.end() &&
         !s.store(Agent::Explainee).queried(phi);
}

std::optional<std::string> query_violation(const DialogueState& s, const Formula& phi) {
  if (s.history().empty()) {
    if (!is_open_topic(s, phi)) return "query precondition (1): the opening query must be a topic formula";
  } else {
    const auto premises = premise_targets(s);
    const bool uttered = std::find(premises.begin(), premises.end(), phi) != premises.end();
    const bool reopening = follows_explainer_agreement(s) && is_open_topic(s, phi);
    if (!uttered && !reopening) {
      return "query precondition (1): " + format_formula(phi) + " was not uttered by the explainer";
    }
  }
  if (s.store(Agent::Explainee).queried(phi)) {
    return "query precondition (2): " + format_formula(phi) + " was already queried";
  }
  if (!query_precondition_3(s, phi)) {
    return "query precondition (3): the explainee already entails " + format_formula(phi);
  }
  return std::nullopt;
}

std::vector<Formula> query_candidates(const DialogueState& s) {
  std::vector<Formula> out;
  if (s.history().empty() || follows_explainer_agreement(s)) {
    for (const auto& phi : s.topic()) {
      if (is_open_topic(s, phi)) out.push_back(phi);
    }
  }
  for (const auto& p : premise_targets(s)) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  std::erase_if(out, [&](const Formula& f) { return query_violation(s, f).has_value(); });
  return out;
}

/// Indices in `source` of the premises of the agent's committed arguments
/// for `claim`, and of the source formulas the agent has not uttered yet.
SearchConstraints constraints_for(const DialogueState& s, Agent agent,
                                  const std::vector<Formula>& source, const Formula& claim) {
  const CommitmentStore& own = s.store(agent);
  std::map<Formula, std::size_t> position;
  for (std::size_t i = 0; i < source.size(); ++i) position.emplace(source[i], i);
  SearchConstraints c;
  for (const auto& a : own.arguments()) {
    if (a.claim != claim) continue;
    IndexSet idx;
    bool inside = true;
    for (const auto& p : a.premises) {
      auto it = position.find(p);
      if (it == position.end()) {
        inside = false;
        break;
      }
      idx.push_back(it->second);
    }
    if (!inside) continue;
    std::sort(idx.begin(), idx.end());
    c.excluded.push_back(std::move(idx));
  }
  IndexSet fresh;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!own.uttered().contains(source[i])) fresh.push_back(i);
  }
  c.require_one_of = std::move(fresh);
  return c;
}

std::vector<Argument> find_supports(const DialogueState& s, const Formula& phi, std::size_t limit) {
  if (!s.agent_entails(Agent::Explainer, phi)) return {};
  const auto& source = s.kb_r().formulas();
  const auto c = constraints_for(s, Agent::Explainer, source, phi);
  std::vector<Argument> out;
  for (const auto& idx : argument_premises(source, phi, c, limit, s.options().budget)) {
    out.push_back(Argument{select(source, idx), phi});
  }
  return out;
}

std::vector<Argument> find_refutes(const DialogueState& s, Agent agent, const Formula& target,
                                   SourceMode mode, std::size_t limit) {
  const Formula claim = complement(target);
  // Restating a position already taken is no new information.
  if (s.store(agent).uttered().contains(claim)) return {};
  // A consistent knowledge base has an argument for a claim iff it entails it.
  if (mode == SourceMode::Pure && !s.agent_entails(agent, claim)) return {};
  const auto source = refute_source(s, agent, mode);
  const auto c = constraints_for(s, agent, source, claim);
  std::vector<Argument> out;
  for (const auto& idx : argument_premises(source, claim, c, limit, s.options().budget)) {
    out.push_back(Argument{select(source, idx), claim});
  }
  return out;
}

SourceMode effective(SourceMode requested, const DialogueState& s) {
  return s.options().protocol_sources == SourceMode::Pure ? SourceMode::Pure : requested;
}

bool any_refute(const DialogueState& s, Agent agent) {
  const SourceMode mode = s.options().protocol_sources;
  for (const auto& target : refute_targets(s, agent, true)) {
    if (!find_refutes(s, agent, target, mode, 1).empty()) return true;
  }
  return false;
}

std::optional<std::string> agree_violation(const DialogueState& s, Agent agent) {
  if (agent == Agent::Explainee) {
    if (s.options().explainee_may_concede || follows_explainer_agreement(s)) return std::nullopt;
    if (!query_candidates(s).empty()) {
      return std::string("agree-to-disagree precondition (1): a query is available");
    }
    if (any_refute(s, agent)) {
      return std::string("agree-to-disagree precondition (2): a refutation is available");
    }
    return std::nullopt;
  }
  if (auto phi = pending_query(s); phi && !find_supports(s, *phi, 1).empty()) {
    return std::string("agree-to-disagree precondition (1): a supporting argument is available");
  }
  if (any_refute(s, agent)) {
    return std::string("agree-to-disagree precondition (2): a refutation is available");
  }
  return std::nullopt;
}

bool is_fresh(const Argument& a, const CommitmentStore& own) {
  return std::any_of(a.premises.begin(), a.premises.end(),
                     [&](const Formula& p) { return !own.uttered().contains(p); });
}

}  // namespace

std::vector<Formula> refute_source(const DialogueState& s, Agent agent, SourceMode mode) {
  std::vector<Formula> source = s.kb(agent).formulas();
  if (mode == SourceMode::Mixed) {
    for (const auto& f : s.store(other(agent)).argument_formulas()) {
      if (!s.kb(agent).contains(f) &&
          std::find(source.begin(), source.end(), f) == source.end()) {
        source.push_back(f);
      }
    }
  }
  return source;
}

std::optional<std::string> violated_precondition(const DialogueState& s, const Move& m) {
  if (s.terminated()) return std::string("dialogue already terminated");
  if (m.agent != s.agent_to_move()) {
    return "not the " + std::string(to_string(m.agent)) + "'s turn";
  }
  if (m.t != 0 && m.t != s.next_timestep()) {
    return "move timestep " + std::to_string(m.t) + " differs from " +
           std::to_string(s.next_timestep());
  }
  if (s.history().empty() && m.locution != Locution::Query) {
    return std::string("the opening move must be a query");
  }
  const bool needs_target = m.locution != Locution::AgreeToDisagree;
  const bool needs_argument =
      m.locution == Locution::Support || m.locution == Locution::Refute;
  if (needs_target != m.target.has_value() || needs_argument != m.argument.has_value()) {
    return "malformed " + std::string(to_string(m.locution)) + " move content";
  }

  switch (m.locution) {
    case Locution::Query:
      if (m.agent != Agent::Explainee) return std::string("query is reserved for the explainee");
      return query_violation(s, *m.target);

    case Locution::Support: {
      if (m.agent != Agent::Explainer) return std::string("support is reserved for the explainer");
      auto phi = pending_query(s);
      if (!phi || *phi != *m.target) {
        return "support precondition (1): query(" + format_formula(*m.target) +
               ") is not the previous move";
      }
      const Argument& a = *m.argument;
      const CommitmentStore& own = s.store(Agent::Explainer);
      if (a.claim != *m.target || !is_argument(s.kb_r().formulas(), a, s.options().budget)) {
        return std::string("support precondition (2): not an argument for the query from the "
                           "explainer knowledge base");
      }
      if (own.has_argument(a)) return std::string("support precondition (2): argument already uttered");
      if (!is_fresh(a, own)) return std::string("support precondition (2): argument adds no new premise");
      return std::nullopt;
    }

    case Locution::Refute: {
      const CommitmentStore& own = s.store(m.agent);
      if (!s.store(other(m.agent)).uttered().contains(*m.target)) {
        return "refute precondition (1): " + format_formula(*m.target) +
               " was not uttered by the opponent";
      }
      const Argument& a = *m.argument;
      const auto source = refute_source(s, m.agent, s.options().protocol_sources);
      if (a.claim != complement(*m.target) || !is_argument(source, a, s.options().budget)) {
        return std::string("refute precondition (2): not a counterargument from the admitted "
                           "sources");
      }
      if (own.has_argument(a)) return std::string("refute precondition (2): argument already uttered");
      if (own.uttered().contains(a.claim)) {
        return std::string("refute precondition (2): claim already asserted by the mover");
      }
      if (!is_fresh(a, own)) return std::string("refute precondition (2): argument adds no new premise");
      return std::nullopt;
    }

    case Locution::AgreeToDisagree:
      return agree_violation(s, m.agent);
  }
  return std::nullopt;
}

DialogueState commit_move(const DialogueState& s, Move m) {
  DialogueState next = s;
  m.t = s.next_timestep();
  Commitment c;
  c.t = m.t;
  c.kind = m.locution;
  if (m.locution == Locution::Query) c.query = m.target;
  if (m.argument) c.argument = m.argument;
  (m.agent == Agent::Explainee ? next.cs_e_ : next.cs_r_).append(std::move(c));
  if (m.agent == Agent::Explainee && m.locution == Locution::AgreeToDisagree) {
    next.terminated_ = true;
  }
  next.history_.push_back(std::move(m));
  return next;
}

DialogueState apply_move(const DialogueState& s, const Move& m) {
  if (auto why = violated_precondition(s, m)) throw ProtocolError("illegal move: " + *why);
  return commit_move(s, m);
}

std::vector<Move> legal_moves(const DialogueState& s, Agent agent, const LegalMoveQuery& q) {
  if (s.terminated()) throw ProtocolError("dialogue already terminated");
  if (agent != s.agent_to_move()) {
    throw ProtocolError("not the " + std::string(to_string(agent)) + "'s turn");
  }
  std::vector<Move> out;
  auto stamp = [&](Move m) {
    m.t = s.next_timestep();
    out.push_back(std::move(m));
  };
  if (s.history().empty()) {
    for (const auto& phi : query_candidates(s)) stamp(Move::query(phi));
    return out;
  }
  const SourceMode mode = effective(q.sources, s);
  bool other_moves = false;
  if (agent == Agent::Explainer) {
    if (auto phi = pending_query(s)) {
      for (auto& a : find_supports(s, *phi, q.per_target_limit)) {
        stamp(Move::support(*phi, std::move(a)));
        other_moves = true;
      }
    }
  }
  for (const auto& target : refute_targets(s, agent, true)) {
    for (auto& a : find_refutes(s, agent, target, mode, q.per_target_limit)) {
      stamp(Move::refute(agent, target, std::move(a)));
      other_moves = true;
    }
  }
  if (agent == Agent::Explainee) {
    for (const auto& phi : query_candidates(s)) {
      stamp(Move::query(phi));
      other_moves = true;
    }
  }
  bool agree_ok;
  if (agent == Agent::Explainee &&
      (s.options().explainee_may_concede || follows_explainer_agreement(s))) {
    agree_ok = true;
  } else if (other_moves) {
    agree_ok = false;
  } else {
    // Nothing found under the requested sources; the protocol may still
    // admit a refutation from wider ones.
    agree_ok = mode == s.options().protocol_sources || !agree_violation(s, agent);
  }
  if (agree_ok) stamp(Move::agree(agent));
  return out;
}

Move next_move(const DialogueState& s, Agent agent, const Strategy& strategy) {
  if (s.terminated()) throw ProtocolError("dialogue already terminated");
  if (agent != s.agent_to_move()) {
    throw ProtocolError("not the " + std::string(to_string(agent)) + "'s turn");
  }
  auto stamped = [&](Move m) {
    m.t = s.next_timestep();
    return m;
  };
  if (s.history().empty()) return stamped(Move::query(s.topic().front()));

  if (agent == Agent::Explainee && follows_explainer_agreement(s)) {
    // Wind-down: reopen the next topic formula, otherwise close.
    for (const auto& phi : s.topic()) {
      if (is_open_topic(s, phi) && !query_violation(s, phi)) return stamped(Move::query(phi));
    }
    return stamped(Move::agree(agent));
  }

  const SourceMode mode = effective(strategy.sources, s);
  auto first_refute = [&](SourceMode m) -> std::optional<Move> {
    for (const auto& target : refute_targets(s, agent, false)) {
      auto found = find_refutes(s, agent, target, m, 1);
      if (!found.empty()) return Move::refute(agent, target, std::move(found.front()));
    }
    return std::nullopt;
  };

  for (Locution l : strategy.priorities) {
    switch (l) {
      case Locution::Refute:
        if (auto m = first_refute(mode)) return stamped(std::move(*m));
        break;
      case Locution::Query:
        if (agent == Agent::Explainee) {
          for (const auto& phi : premise_targets(s)) {
            if (!query_violation(s, phi)) return stamped(Move::query(phi));
          }
        }
        break;
      case Locution::Support:
        if (agent == Agent::Explainer) {
          if (auto phi = pending_query(s)) {
            auto found = find_supports(s, *phi, 1);
            if (!found.empty()) return stamped(Move::support(*phi, std::move(found.front())));
          }
        }
        break;
      case Locution::AgreeToDisagree:
        if (mode == s.options().protocol_sources || !agree_violation(s, agent)) {
          return stamped(Move::agree(agent));
        }
        break;
    }
  }
  // The strategy looked at narrower sources than the protocol admits and
  // agreeing is not yet allowed: fall back to the protocol's own sources.
  if (auto m = first_refute(s.options().protocol_sources)) return stamped(std::move(*m));
  for (const auto& target : refute_targets(s, agent, true)) {
    auto found = find_refutes(s, agent, target, s.options().protocol_sources, 1);
    if (!found.empty()) return stamped(Move::refute(agent, target, std::move(found.front())));
  }
  return stamped(Move::agree(agent));
}

std::size_t default_move_budget(const KnowledgeBase& kb_r, const KnowledgeBase& kb_e) {
  return 10 * (kb_r.size() + kb_e.size());
}

DialogueState run_to_end(DialogueState s, const Strategies& strategies, std::size_t move_budget,
                         DialogueStats* stats) {
  using Clock = std::chrono::steady_clock;
  while (!s.terminated()) {
    if (s.history().size() >= move_budget) {
      throw BudgetExceeded("dialogue exceeded its move budget of " + std::to_string(move_budget));
    }
    const Agent agent = s.agent_to_move();
    const auto t0 = Clock::now();
    Move m = next_move(s, agent, strategies.of(agent));
    if (stats) stats->seconds += std::chrono::duration<double>(Clock::now() - t0).count();
    s = commit_move(s, std::move(m));
  }
  if (stats) stats->moves = s.history().size();
  return s;
}

DialogueState run_dialogue(const KnowledgeBase& kb_r, const KnowledgeBase& kb_e,
                           const std::vector<Formula>& topic, const Strategies& strategies,
                           std::optional<std::size_t> move_budget, const DialogueOptions& options,
                           DialogueStats* stats) {
  DialogueState s = DialogueState::start(kb_r, kb_e, topic, options);
  return run_to_end(std::move(s), strategies, move_budget.value_or(default_move_budget(kb_r, kb_e)),
                    stats);
}

DialogueState replay(const DialogueState& empty, const std::vector<Move>& moves) {
  DialogueState s = empty;
  for (const auto& m : moves) s = apply_move(s, m);
  return s;
}

bool is_well_formed(const DialogueState& d, const Strategies& strategies) {
  if (!d.terminated()) return false;
  DialogueState s = DialogueState::start(d.kb_r(), d.kb_e(), d.topic(), d.options());
  const auto& moves = d.history();
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (violated_precondition(s, moves[i])) return false;
    if (i > 0 && next_move(s, moves[i].agent, strategies.of(moves[i].agent)) != moves[i]) {
      return false;
    }
    s = commit_move(s, moves[i]);
  }
  return s.terminated();
}

}  // namespace drhai
