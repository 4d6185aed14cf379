#include "drhai/reconciliation.hpp"

#include <algorithm>

#include "drhai/errors.hpp"

namespace drhai {

namespace {

bool contains(const std::vector<Formula>& v, const Formula& f) {
  return std::find(v.begin(), v.end(), f) != v.end();
}

bool entails_all(const KnowledgeBase& kb, const std::vector<Formula>& topic,
                 const sat::Budget& budget) {
  return std::all_of(topic.begin(), topic.end(),
                     [&](const Formula& phi) { return entails(kb.formulas(), phi, budget); });
}

}  // namespace

UpdateRecord update_kb(const KnowledgeBase& kb, const Argument& a,
                       const std::vector<Formula>& protected_formulas,
                       const sat::Budget& budget) {
  if (!is_satisfiable(a.premises, budget)) {
    throw PreconditionError("update_kb: argument premises are unsatisfiable");
  }
  UpdateRecord rec{a, {}, {}, KnowledgeBase(kb.label())};

  std::vector<Formula> hard = a.premises;
  for (const auto& f : protected_formulas) {
    if (!contains(hard, f)) hard.push_back(f);
  }
  std::vector<Formula> soft;
  for (const auto& f : kb) {
    if (!contains(hard, f)) soft.push_back(f);
  }
  std::vector<Formula> all = soft;
  all.insert(all.end(), hard.begin(), hard.end());
  if (!is_satisfiable(all, budget)) {
    if (!is_satisfiable(hard, budget)) {
      throw Error("update_kb: added and protected premises are jointly unsatisfiable");
    }
    for (std::size_t i : find_mcs(hard, soft, budget)) rec.retracted.push_back(soft[i]);
  }
  for (const auto& f : kb) {
    if (!contains(rec.retracted, f)) rec.resulting_kb.add(f);
  }
  for (const auto& p : a.premises) {
    if (rec.resulting_kb.add(p)) rec.added.push_back(p);
  }
  return rec;
}

SuccessResult success_procedure(const KnowledgeBase& kb_e, const CommitmentStore& cs_r,
                                const std::vector<Formula>& topic, const sat::Budget& budget) {
  SuccessResult out{kb_e, {}};
  if (entails_all(out.kb, topic, budget)) return out;
  std::vector<Formula> protected_formulas;
  const auto args = cs_r.arguments();
  for (auto it = args.rbegin(); it != args.rend(); ++it) {
    UpdateRecord rec = update_kb(out.kb, *it, protected_formulas, budget);
    for (const auto& p : it->premises) {
      if (!contains(protected_formulas, p)) protected_formulas.push_back(p);
    }
    out.kb = rec.resulting_kb;
    out.updates.push_back(std::move(rec));
    if (entails_all(out.kb, topic, budget)) return out;
  }
  throw Error("success procedure exhausted the explainer's arguments without entailing the topic");
}

std::vector<Formula> queried_topic(const DialogueState& s) {
  std::vector<Formula> out;
  for (const auto& e : s.store(Agent::Explainee).entries()) {
    if (e.query) out.push_back(*e.query);
  }
  return out;
}

std::string format_ratio(const Ratio& r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

SimilarityReport similarity(const KnowledgeBase& kb_e, const KnowledgeBase& kb_r, double alpha,
                            const sat::Budget& budget) {
  if (alpha < 0.0 || alpha > 1.0) throw PreconditionError("similarity: alpha outside [0, 1]");
  SimilarityReport r;
  r.alpha = alpha;

  std::size_t common = 0;
  for (const auto& f : kb_e) common += kb_r.contains(f) ? 1 : 0;
  r.syntactic = kb_e.empty() && kb_r.empty() ? Ratio{1, 1}
                                             : Ratio{2 * common, kb_e.size() + kb_r.size()};

  r.vocabulary = kb_e.atoms();
  const auto more = kb_r.atoms();
  r.vocabulary.insert(more.begin(), more.end());
  r.entailed_e = entailed_literals(kb_e.formulas(), r.vocabulary, budget);
  r.entailed_r = entailed_literals(kb_r.formulas(), r.vocabulary, budget);
  std::size_t shared = 0;
  for (const auto& l : r.entailed_e) shared += r.entailed_r.contains(l) ? 1 : 0;
  const std::size_t total = r.entailed_e.size() + r.entailed_r.size();
  r.semantic = total == 0 ? Ratio{1, 1} : Ratio{2 * shared, total};

  r.sigma = alpha * r.syntactic.value() + (1.0 - alpha) * r.semantic.value();
  return r;
}

SingleShotExplanation single_shot_explanation(const KnowledgeBase& kb_r, const KnowledgeBase& kb_e,
                                              const Formula& query, const sat::Budget& budget) {
  const std::string name = "'" + format_formula(query) + "'";
  if (!entails(kb_r.formulas(), query, budget)) {
    throw PreconditionError("single-shot explanation: " + name + " is not entailed by kb_r");
  }
  if (entails(kb_e.formulas(), query, budget) &&
      !entails(kb_e.formulas(), complement(query), budget)) {
    throw PreconditionError("single-shot explanation: " + name + " is already entailed by kb_e");
  }
  auto first = argument_premises(kb_r.formulas(), query, {}, 1, budget);
  if (first.empty()) throw Error("single-shot explanation: no argument for " + name);
  SingleShotExplanation x;
  x.additions = select(kb_r.formulas(), first.front());
  std::vector<Formula> soft;
  for (const auto& f : kb_e) {
    if (!contains(x.additions, f)) soft.push_back(f);
  }
  for (std::size_t i : find_mcs(x.additions, soft, budget)) x.removals.push_back(soft[i]);
  return x;
}

KnowledgeBase apply_explanation(const KnowledgeBase& kb_e, const SingleShotExplanation& x) {
  KnowledgeBase out(kb_e.label());
  for (const auto& f : kb_e) {
    if (!contains(x.removals, f)) out.add(f);
  }
  for (const auto& f : x.additions) out.add(f);
  return out;
}

}  // namespace drhai
