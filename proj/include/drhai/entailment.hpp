#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "drhai/cnf.hpp"
#include "drhai/formula.hpp"
#include "drhai/sat.hpp"

namespace drhai {

/// Sorted, duplicate-free indices into an indexed formula collection.
using IndexSet = std::vector<std::size_t>;

std::vector<Formula> select(std::span<const Formula> formulas, const IndexSet& indices);

struct SolveStatistics {
  std::uint64_t solver_calls = 0;
  double seconds = 0.0;
};

/// One incremental solver plus the encoder feeding it. Single-threaded;
/// create one per thread.
class SolveContext {
 public:
  explicit SolveContext(sat::Budget budget = {});

  /// Adds every formula of `formulas` under its own selector, in order.
  /// Returns the selectors.
  std::vector<sat::Lit> add_group(std::span<const Formula> formulas);
  sat::Lit add_guarded(const Formula& f) { return encoder_.add_guarded(f); }
  void add_hard(const Formula& f) { encoder_.add_hard(f); }
  sat::Lit literal_for(const Formula& f) { return encoder_.literal_for(f); }
  sat::Lit atom_literal(const std::string& name) { return encoder_.atom(name); }
  sat::Var new_var() { return solver_.new_var(); }
  void add_clause(std::vector<sat::Lit> clause) { solver_.add_clause(std::move(clause)); }

  /// True when satisfiable under `assumptions`. Throws BudgetExceeded.
  bool solve(std::span<const sat::Lit> assumptions = {});
  /// Assumptions responsible for the last Unsat answer.
  const std::vector<sat::Lit>& core() const { return solver_.failed_assumptions(); }
  bool model_value(sat::Lit l) const { return solver_.model_value(l); }
  bool model_atom(const std::string& name) const;

  const SolveStatistics& statistics() const { return stats_; }
  void set_budget(const sat::Budget& b) { solver_.set_budget(b); }

 private:
  sat::Solver solver_;
  Encoder encoder_;
  SolveStatistics stats_;
};

bool is_satisfiable(std::span<const Formula> formulas, const sat::Budget& budget = {});
bool entails(std::span<const Formula> kb, const Formula& claim,
             const sat::Budget& budget = {});

/// Deletion-based shrink: minimal S with S + {anchor} unsatisfiable. The
/// anchor is always held. Throws PreconditionError if formulas + anchor is
/// satisfiable.
IndexSet find_mus(std::span<const Formula> formulas, const Formula& anchor,
                  const sat::Budget& budget = {});

struct MusEnumeration {
  std::vector<IndexSet> sets;
  bool complete = true;  // false when the budget ran out or limit truncated
};

/// Every minimal S (w.r.t. the anchor) in sorted-index-tuple order, up to
/// `limit`.
MusEnumeration enumerate_mus(std::span<const Formula> formulas, const Formula& anchor,
                             std::size_t limit, const sat::Budget& budget = {});

/// Minimum-cardinality correction set of `soft` against `hard`; ties go to
/// the lexicographically smallest sorted index tuple.
IndexSet find_mcs(std::span<const Formula> hard, std::span<const Formula> soft,
                  const sat::Budget& budget = {});

struct Literal {
  std::string atom;
  bool positive = true;

  Formula to_formula() const;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

using LiteralSet = std::set<Literal>;

std::string format_literal(const Literal& l);

/// {l over vocabulary : kb |= l}. Throws PreconditionError on an
/// unsatisfiable kb.
LiteralSet entailed_literals(std::span<const Formula> kb,
                             const std::set<std::string>& vocabulary,
                             const sat::Budget& budget = {});

/// Level-wise enumeration of minimal subsets S of `soft` for which
/// S + hard is unsatisfiable, by increasing cardinality. Implements the
/// seed/shrink/grow loop with a map solver over inclusion variables and a
/// cardinality bound, so all sets of size k are produced before any of size
/// k + 1.
class MinimalUnsatEnumerator {
 public:
  MinimalUnsatEnumerator(std::span<const Formula> soft, std::span<const Formula> hard,
                         const sat::Budget& budget = {});

  /// Excludes `s` and all its supersets from the results.
  void block(const IndexSet& s);
  /// Requires every further result to contain an index from `s`.
  void require_any(const IndexSet& s);
  /// Restricts candidates to the listed indices.
  void restrict_to(const IndexSet& allowed);

  /// Next non-empty cardinality level (sets sorted lexicographically), or
  /// nullopt once exhausted.
  std::optional<std::vector<IndexSet>> next_level();

  /// Whether the soft subset alone (without the hard part) is satisfiable.
  bool soft_subset_satisfiable(const IndexSet& s);

  std::size_t size() const { return soft_size_; }
  const SolveStatistics& check_statistics() const { return check_.statistics(); }

 private:
  bool check(const IndexSet& s, bool with_hard);
  IndexSet shrink(IndexSet seed);
  IndexSet grow(IndexSet seed);
  sat::Lit at_least(std::size_t k);
  void build_counter(std::size_t cap);

  std::vector<Formula> soft_;
  std::size_t soft_size_;
  std::vector<bool> allowed_;
  SolveContext check_;
  std::vector<sat::Lit> soft_sel_;
  std::vector<sat::Lit> hard_sel_;
  sat::Solver map_;
  std::vector<std::vector<sat::Lit>> counter_;  // counter_[j] = "at least j+1"
  std::size_t counter_cap_ = 0;
  std::size_t level_ = 0;
  bool exhausted_ = false;
};

/// Indices of `formulas` connected to `seed_atoms` through shared atoms.
IndexSet relevant_indices(std::span<const Formula> formulas,
                          const std::set<std::string>& seed_atoms);

}  // namespace drhai
