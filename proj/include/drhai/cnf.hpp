#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "drhai/formula.hpp"
#include "drhai/sat.hpp"

namespace drhai {

enum class VarRole : unsigned char { Atom, Selector, Auxiliary };

/// Clause form of a knowledge base. Each KB formula's clauses carry the
/// negated selector, so a group only constrains models when its selector is
/// asserted. Auxiliary variables come from definitional translation of
/// non-clausal subformulas and never coincide with atom or selector
/// variables.
struct ClauseSet {
  int num_vars = 0;
  std::vector<std::vector<sat::Lit>> clauses;
  std::vector<sat::Var> selectors;  // KB index -> selector variable
  std::map<std::string, sat::Var> atom_to_var;
  std::vector<VarRole> roles;       // indexed by variable
};

/// Incremental definitional (Tseitin) translator. Clauses are handed to
/// `emit` as they are produced; variables come from `new_var`.
class Encoder {
 public:
  Encoder(std::function<sat::Var(VarRole)> new_var,
          std::function<void(std::vector<sat::Lit>)> emit);

  sat::Lit atom(const std::string& name);
  std::optional<sat::Lit> find_atom(const std::string& name) const;
  const std::map<std::string, sat::Var>& atoms() const { return atoms_; }

  /// Adds `f` unconditionally.
  void add_hard(const Formula& f);
  /// Adds `f` under a fresh selector; returns the selector as a positive
  /// literal to be used as an assumption.
  sat::Lit add_guarded(const Formula& f);

  /// A literal equivalent to `f` (definitions emitted unguarded).
  sat::Lit literal_for(const Formula& f);

 private:
  void clausify(const Formula& f, bool positive, std::vector<std::vector<sat::Lit>>& out);
  void disjuncts(const Formula& f, bool positive, std::vector<sat::Lit>& out);
  sat::Lit define(const Formula& f);

  std::function<sat::Var(VarRole)> new_var_;
  std::function<void(std::vector<sat::Lit>)> emit_;
  std::map<std::string, sat::Var> atoms_;
  std::unordered_map<Formula, sat::Lit, FormulaHash> definitions_;
};

/// Compiles `kb` (one selector per formula, in index order) plus `extra`
/// formulas that are always active.
ClauseSet compile(const KnowledgeBase& kb, std::span<const Formula> extra = {});

}  // namespace drhai
