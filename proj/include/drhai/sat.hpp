#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace drhai::sat {

using Var = int;

/// Literal packed as 2*var + sign (sign set = negative).
struct Lit {
  int code = -2;

  static constexpr Lit make(Var v, bool negative = false) {
    return Lit{2 * v + (negative ? 1 : 0)};
  }
  constexpr Var var() const { return code >> 1; }
  constexpr bool negative() const { return code & 1; }
  constexpr Lit operator~() const { return Lit{code ^ 1}; }
  friend constexpr bool operator==(Lit a, Lit b) = default;
  friend constexpr auto operator<=>(Lit a, Lit b) = default;
};

enum class Status { Sat, Unsat };

/// Per-call resource allowance. A call that exhausts it throws
/// BudgetExceeded; `deadline`, when set, is an absolute cut-off shared by
/// many calls.
struct Budget {
  std::uint64_t max_conflicts = 1'000'000;
  std::chrono::milliseconds max_time{5000};
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct Stats {
  std::uint64_t solves = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
};

/// Conflict-driven clause-learning solver with incremental solving under
/// assumptions. Deterministic: no randomness anywhere, so equal inputs give
/// equal answers and equal models.
class Solver {
 public:
  Solver() = default;

  Var new_var();
  int num_vars() const { return static_cast<int>(assigns_.size()); }

  /// Adds a permanent clause. Returns false once the formula is known
  /// unsatisfiable without assumptions.
  bool add_clause(std::vector<Lit> lits);

  Status solve(std::span<const Lit> assumptions = {});

  /// Model value after a Sat answer.
  bool model_value(Var v) const { return model_[v]; }
  bool model_value(Lit l) const { return model_[l.var()] != l.negative(); }

  /// After an Unsat answer under assumptions: a subset of the assumptions
  /// that is already contradictory together with the clauses.
  const std::vector<Lit>& failed_assumptions() const { return failed_; }

  void set_budget(const Budget& b) { budget_ = b; }
  const Budget& budget() const { return budget_; }
  const Stats& stats() const { return stats_; }
  bool okay() const { return ok_; }

 private:
  using CRef = std::uint32_t;
  static constexpr CRef kNoReason = 0xffffffffu;

  struct Clause {
    std::vector<Lit> lits;
    double activity = 0;
    bool learnt = false;
    bool removed = false;
  };
  struct Watcher {
    CRef cref;
    Lit blocker;
  };

  // lbool encoding: 0 undefined, 1 true, -1 false
  int value(Lit l) const {
    int v = assigns_[l.var()];
    return l.negative() ? -v : v;
  }
  int level(Var v) const { return level_[v]; }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void attach(CRef cr);
  void enqueue(Lit l, CRef reason);
  CRef propagate();
  void analyze(CRef conflict, std::vector<Lit>& learnt, int& backtrack_level);
  bool redundant(Lit l) const;
  void analyze_final(Lit p);
  void cancel_until(int lvl);
  Lit pick_branch();
  void bump_var(Var v);
  void bump_clause(Clause& c);
  void reduce_db();
  void check_budget(std::chrono::steady_clock::time_point start,
                    std::uint64_t conflicts_at_start) const;

  // order heap (max-activity, ties broken by smaller var)
  bool heap_less(Var a, Var b) const;
  void heap_insert(Var v);
  void heap_up(int pos);
  void heap_down(int pos);
  Var heap_pop();

  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<signed char> assigns_;
  std::vector<bool> polarity_;
  std::vector<int> level_;
  std::vector<CRef> reason_;
  std::vector<double> activity_;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  mutable std::vector<char> seen_;
  std::vector<Lit> assumptions_;
  std::vector<bool> model_;
  std::vector<Lit> failed_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  std::size_t num_learnts_ = 0;
  std::size_t max_learnts_ = 4000;
  Budget budget_;
  Stats stats_;
};

}  // namespace drhai::sat
