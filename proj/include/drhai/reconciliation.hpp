#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "drhai/argumentation.hpp"
#include "drhai/dialogue.hpp"
#include "drhai/entailment.hpp"
#include "drhai/formula.hpp"

namespace drhai {

struct UpdateRecord {
  Argument argument_applied;
  std::vector<Formula> added;      // premises that were not already present
  std::vector<Formula> retracted;  // gamma
  KnowledgeBase resulting_kb;
};

/// (kb + premises(a)) minus a minimum correction set drawn from the formulas
/// that are neither premises of `a` nor `protected_formulas`.
UpdateRecord update_kb(const KnowledgeBase& kb, const Argument& a,
                       const std::vector<Formula>& protected_formulas,
                       const sat::Budget& budget = {});

struct SuccessResult {
  KnowledgeBase kb;
  std::vector<UpdateRecord> updates;
};

/// Applies the explainer's committed arguments, latest first, until the
/// knowledge base entails every topic formula. Throws Error if the store runs
/// out first.
SuccessResult success_procedure(const KnowledgeBase& kb_e, const CommitmentStore& cs_r,
                                const std::vector<Formula>& topic,
                                const sat::Budget& budget = {});

/// Every formula the explainee queried, in query order.
std::vector<Formula> queried_topic(const DialogueState& s);

/// Exact fraction, kept unreduced as computed.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio& a, const Ratio& b) { return a.num * b.den == b.num * a.den; }
};

std::string format_ratio(const Ratio& r);

struct SimilarityReport {
  Ratio syntactic;
  Ratio semantic;
  double alpha = 0.5;
  double sigma = 0.0;
  std::set<std::string> vocabulary;
  LiteralSet entailed_e;
  LiteralSet entailed_r;
};

/// Weighted Sørensen-Dice similarity over formulas (structural identity) and
/// entailed literals over the joint vocabulary. A component whose two sides
/// are both empty counts as 1.
SimilarityReport similarity(const KnowledgeBase& kb_e, const KnowledgeBase& kb_r,
                            double alpha = 0.5, const sat::Budget& budget = {});

struct SingleShotExplanation {
  std::vector<Formula> additions;
  std::vector<Formula> removals;
};

SingleShotExplanation single_shot_explanation(const KnowledgeBase& kb_r, const KnowledgeBase& kb_e,
                                              const Formula& query,
                                              const sat::Budget& budget = {});

/// (kb_e + additions) - removals.
KnowledgeBase apply_explanation(const KnowledgeBase& kb_e, const SingleShotExplanation& x);

}  // namespace drhai
