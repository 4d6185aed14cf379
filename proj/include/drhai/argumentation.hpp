#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drhai/entailment.hpp"
#include "drhai/formula.hpp"
#include "drhai/sat.hpp"

namespace drhai {

/// A premise set with the claim it supports. Premises keep the order of the
/// knowledge base they were drawn from; equality ignores that order.
struct Argument {
  std::vector<Formula> premises;
  Formula claim;

  std::vector<Formula> sorted_premises() const;
  friend bool operator==(const Argument& a, const Argument& b);
};

std::string format_argument(const Argument& a);

struct ArgumentList {
  std::vector<Argument> arguments;
  bool complete = true;
};

/// Arguments for `claim` with premises drawn from `kb`, ordered by premise
/// cardinality, then by index tuple. `kb` may be inconsistent. Stops after
/// `limit` results (complete = false when more exist or the budget ran out).
ArgumentList arguments_for(std::span<const Formula> kb, const Formula& claim,
                           std::size_t limit, const sat::Budget& budget = {});

/// Checks the four argument conditions literally: premises drawn from kb,
/// consistent, entail the claim, and no proper subset entails it.
bool is_argument(std::span<const Formula> kb, const Argument& a,
                 const sat::Budget& budget = {});

/// Arguments from `source` against the single formula `target`, i.e.
/// arguments for its complement.
ArgumentList counterarguments_for(std::span<const Formula> source, const Formula& target,
                                  std::size_t limit, const sat::Budget& budget = {});

/// True iff the two premise sets are jointly inconsistent.
bool is_counterargument(const Argument& a, const Argument& b,
                        const sat::Budget& budget = {});

/// Restrictions used when an agent looks for an argument it may still utter.
struct SearchConstraints {
  /// Premise sets (as indices into the source) that must not be returned.
  std::vector<IndexSet> excluded;
  /// When set, every result must use at least one of these indices.
  std::optional<IndexSet> require_one_of;
};

/// Premise index sets of arguments for `claim` from `source` that satisfy
/// `constraints`, in cardinality-then-lexicographic order, at most `limit`.
/// Throws BudgetExceeded.
std::vector<IndexSet> argument_premises(std::span<const Formula> source, const Formula& claim,
                                        const SearchConstraints& constraints,
                                        std::size_t limit, const sat::Budget& budget = {});

}  // namespace drhai
