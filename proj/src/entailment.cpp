#include "drhai/entailment.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <unordered_map>

#include "drhai/errors.hpp"

namespace drhai {

using sat::Lit;
using sat::Var;

std::vector<Formula> select(std::span<const Formula> formulas, const IndexSet& indices) {
  std::vector<Formula> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(formulas[i]);
  return out;
}

// ---------------------------------------------------------------------------
// SolveContext

SolveContext::SolveContext(sat::Budget budget)
    : encoder_([this](VarRole) { return solver_.new_var(); },
               [this](std::vector<Lit> c) { solver_.add_clause(std::move(c)); }) {
  solver_.set_budget(budget);
}

std::vector<Lit> SolveContext::add_group(std::span<const Formula> formulas) {
  std::vector<Lit> selectors;
  selectors.reserve(formulas.size());
  for (const auto& f : formulas) selectors.push_back(encoder_.add_guarded(f));
  return selectors;
}

bool SolveContext::solve(std::span<const Lit> assumptions) {
  const auto start = std::chrono::steady_clock::now();
  ++stats_.solver_calls;
  struct Clock {
    SolveStatistics& s;
    std::chrono::steady_clock::time_point t0;
    ~Clock() {
      s.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  } clock{stats_, start};
  return solver_.solve(assumptions) == sat::Status::Sat;
}

bool SolveContext::model_atom(const std::string& name) const {
  auto lit = encoder_.find_atom(name);
  return lit && solver_.model_value(*lit);
}

// ---------------------------------------------------------------------------
// Single-shot procedures

bool is_satisfiable(std::span<const Formula> formulas, const sat::Budget& budget) {
  SolveContext ctx(budget);
  for (const auto& f : formulas) ctx.add_hard(f);
  return ctx.solve();
}

bool entails(std::span<const Formula> kb, const Formula& claim, const sat::Budget& budget) {
  SolveContext ctx(budget);
  for (const auto& f : kb) ctx.add_hard(f);
  ctx.add_hard(Formula::negation(claim));
  return !ctx.solve();
}

namespace {

// Maps selector literals of a core back to soft indices.
class SelectorIndex {
 public:
  explicit SelectorIndex(const std::vector<Lit>& selectors) {
    for (std::size_t i = 0; i < selectors.size(); ++i) index_[selectors[i].code] = i;
  }
  IndexSet from_core(const std::vector<Lit>& core, const IndexSet& within) const {
    IndexSet out;
    for (Lit l : core) {
      auto it = index_.find(l.code);
      if (it != index_.end()) out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    IndexSet filtered;
    std::set_intersection(out.begin(), out.end(), within.begin(), within.end(),
                          std::back_inserter(filtered));
    return filtered;
  }

 private:
  std::unordered_map<int, std::size_t> index_;
};

std::vector<Lit> assumptions_for(const std::vector<Lit>& selectors, const IndexSet& s) {
  std::vector<Lit> out;
  out.reserve(s.size());
  for (std::size_t i : s) out.push_back(selectors[i]);
  return out;
}

// Deletion-based shrink with core refinement. `s` must be unsatisfiable
// together with the always-active part of `ctx`.
IndexSet shrink_subset(SolveContext& ctx, const std::vector<Lit>& selectors,
                       const SelectorIndex& index, IndexSet s,
                       const std::vector<Lit>& extra_assumptions) {
  auto unsat_with = [&](const IndexSet& subset) {
    auto as = assumptions_for(selectors, subset);
    as.insert(as.end(), extra_assumptions.begin(), extra_assumptions.end());
    return !ctx.solve(as);
  };
  if (!unsat_with(s)) throw PreconditionError("subset to shrink is satisfiable");
  s = index.from_core(ctx.core(), s);
  const IndexSet order = s;
  for (std::size_t i : order) {
    auto pos = std::lower_bound(s.begin(), s.end(), i);
    if (pos == s.end() || *pos != i) continue;
    IndexSet without = s;
    without.erase(without.begin() + (pos - s.begin()));
    if (unsat_with(without)) s = index.from_core(ctx.core(), without);
  }
  return s;
}

IndexSet all_indices(std::size_t n) {
  IndexSet out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace

IndexSet find_mus(std::span<const Formula> formulas, const Formula& anchor,
                  const sat::Budget& budget) {
  SolveContext ctx(budget);
  auto selectors = ctx.add_group(formulas);
  ctx.add_hard(anchor);
  SelectorIndex index(selectors);
  try {
    return shrink_subset(ctx, selectors, index, all_indices(formulas.size()), {});
  } catch (const PreconditionError&) {
    throw PreconditionError("find_mus: formulas together with the anchor are satisfiable");
  }
}

MusEnumeration enumerate_mus(std::span<const Formula> formulas, const Formula& anchor,
                             std::size_t limit, const sat::Budget& budget) {
  MusEnumeration result;
  const Formula hard[] = {anchor};
  MinimalUnsatEnumerator en(formulas, hard, budget);
  try {
    while (auto level = en.next_level()) {
      result.sets.insert(result.sets.end(), level->begin(), level->end());
    }
  } catch (const BudgetExceeded&) {
    result.complete = false;
  }
  std::sort(result.sets.begin(), result.sets.end());
  if (result.sets.size() > limit) {
    result.sets.resize(limit);
    result.complete = false;
  }
  return result;
}

namespace {

// Sinz sequential counter over `inputs`, counting up to `cap`. Returns
// out[j] meaning "at least j+1 inputs are true" (implied direction only,
// which is all an at-most bound needs).
template <typename NewVar, typename AddClause>
std::vector<Lit> sequential_counter(const std::vector<Lit>& inputs, std::size_t cap,
                                    NewVar&& new_var, AddClause&& add) {
  std::vector<Lit> prev;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::size_t width = std::min(cap, i + 1);
    std::vector<Lit> cur(width);
    for (std::size_t j = 0; j < width; ++j) cur[j] = Lit::make(new_var());
    const Lit x = inputs[i];
    add(std::vector<Lit>{~x, cur[0]});
    for (std::size_t j = 0; j < width; ++j) {
      if (j < prev.size()) add(std::vector<Lit>{~prev[j], cur[j]});
      if (j >= 1 && j - 1 < prev.size()) add(std::vector<Lit>{~x, ~prev[j - 1], cur[j]});
    }
    prev = std::move(cur);
  }
  return prev;
}

}  // namespace

IndexSet find_mcs(std::span<const Formula> hard, std::span<const Formula> soft,
                  const sat::Budget& budget) {
  SolveContext ctx(budget);
  for (const auto& f : hard) ctx.add_hard(f);
  if (!ctx.solve()) throw PreconditionError("find_mcs: hard formulas are unsatisfiable");
  auto selectors = ctx.add_group(soft);
  if (ctx.solve(selectors)) return {};

  SelectorIndex index(selectors);
  const std::size_t n = soft.size();

  // Lower bound from disjoint cores.
  std::size_t lower = 0;
  {
    IndexSet active = all_indices(n);
    for (;;) {
      auto as = assumptions_for(selectors, active);
      if (ctx.solve(as)) break;
      IndexSet core = index.from_core(ctx.core(), active);
      if (core.empty()) break;
      ++lower;
      IndexSet rest;
      std::set_difference(active.begin(), active.end(), core.begin(), core.end(),
                          std::back_inserter(rest));
      active.swap(rest);
    }
  }

  std::vector<Lit> removed;
  removed.reserve(n);
  for (Lit s : selectors) removed.push_back(~s);
  std::vector<Lit> counter;
  std::size_t cap = 0;
  auto at_most = [&](std::size_t k) -> std::vector<Lit> {
    if (k >= n) return {};
    if (k + 1 > cap) {
      cap = std::max<std::size_t>(2 * cap, k + 1);
      counter = sequential_counter(
          removed, std::min(cap, n), [&ctx] { return ctx.new_var(); },
          [&ctx](std::vector<Lit> c) { ctx.add_clause(std::move(c)); });
    }
    return {~counter[k]};
  };

  std::size_t k = std::max<std::size_t>(lower, 1);
  while (!ctx.solve(at_most(k))) ++k;

  // Greedy lexicographic minimisation at cardinality k.
  std::vector<Lit> fixed = at_most(k);
  IndexSet gamma;
  for (std::size_t i = 0; i < n && gamma.size() < k; ++i) {
    fixed.push_back(~selectors[i]);
    if (ctx.solve(fixed)) {
      gamma.push_back(i);
    } else {
      fixed.back() = selectors[i];
    }
  }
  return gamma;
}

// ---------------------------------------------------------------------------
// Literals

Formula Literal::to_formula() const {
  Formula a = Formula::atom(atom);
  return positive ? a : Formula::negation(a);
}

std::string format_literal(const Literal& l) { return (l.positive ? "" : "!") + l.atom; }

LiteralSet entailed_literals(std::span<const Formula> kb,
                             const std::set<std::string>& vocabulary,
                             const sat::Budget& budget) {
  SolveContext ctx(budget);
  for (const auto& f : kb) ctx.add_hard(f);
  if (!ctx.solve()) throw PreconditionError("entailed_literals: knowledge base is unsatisfiable");

  std::vector<std::string> atoms(vocabulary.begin(), vocabulary.end());
  std::vector<Lit> lits;
  for (const auto& a : atoms) lits.push_back(ctx.atom_literal(a));
  // seen[i] bit 0: some model has the atom true; bit 1: some model false.
  std::vector<unsigned char> seen(atoms.size(), 0);
  auto record_model = [&] {
    for (std::size_t i = 0; i < atoms.size(); ++i) seen[i] |= ctx.model_value(lits[i]) ? 1 : 2;
  };
  ctx.solve();
  record_model();

  LiteralSet out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (bool positive : {true, false}) {
      if (seen[i] & (positive ? 2 : 1)) continue;  // countermodel already known
      const Lit assume[] = {positive ? ~lits[i] : lits[i]};
      if (ctx.solve(assume)) {
        record_model();
      } else {
        out.insert(Literal{atoms[i], positive});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimal unsatisfiable subset enumeration

MinimalUnsatEnumerator::MinimalUnsatEnumerator(std::span<const Formula> soft,
                                               std::span<const Formula> hard,
                                               const sat::Budget& budget)
    : soft_(soft.begin(), soft.end()), soft_size_(soft.size()), check_(budget) {
  soft_sel_ = check_.add_group(soft);
  hard_sel_ = check_.add_group(hard);
  map_.set_budget(budget);
  for (std::size_t i = 0; i < soft_size_; ++i) map_.new_var();
  allowed_.assign(soft_size_, true);
}

void MinimalUnsatEnumerator::block(const IndexSet& s) {
  std::vector<Lit> clause;
  for (std::size_t i : s) clause.push_back(Lit::make(static_cast<Var>(i), true));
  if (!map_.add_clause(clause)) exhausted_ = true;
}

void MinimalUnsatEnumerator::require_any(const IndexSet& s) {
  std::vector<Lit> clause;
  for (std::size_t i : s) clause.push_back(Lit::make(static_cast<Var>(i)));
  if (!map_.add_clause(clause)) exhausted_ = true;
}

void MinimalUnsatEnumerator::restrict_to(const IndexSet& allowed) {
  std::vector<bool> ok(soft_size_, false);
  for (std::size_t i : allowed) ok[i] = true;
  for (std::size_t i = 0; i < soft_size_; ++i) {
    if (ok[i]) continue;
    allowed_[i] = false;
    if (!map_.add_clause({Lit::make(static_cast<Var>(i), true)})) exhausted_ = true;
  }
}

bool MinimalUnsatEnumerator::check(const IndexSet& s, bool with_hard) {
  auto as = assumptions_for(soft_sel_, s);
  if (with_hard) as.insert(as.end(), hard_sel_.begin(), hard_sel_.end());
  return check_.solve(as);
}

bool MinimalUnsatEnumerator::soft_subset_satisfiable(const IndexSet& s) {
  return check(s, false);
}

IndexSet MinimalUnsatEnumerator::shrink(IndexSet seed) {
  SelectorIndex index(soft_sel_);
  return shrink_subset(check_, soft_sel_, index, std::move(seed), hard_sel_);
}

IndexSet MinimalUnsatEnumerator::grow(IndexSet seed) {
  std::vector<bool> in(soft_size_, false);
  for (std::size_t i : seed) in[i] = true;
  auto absorb_model = [&] {
    auto value = [this](const std::string& a) { return check_.model_atom(a); };
    for (std::size_t j = 0; j < soft_size_; ++j) {
      if (!in[j] && allowed_[j] && evaluate(soft_[j], value)) in[j] = true;
    }
  };
  absorb_model();  // model of the last satisfiable check
  // Only allowed indices matter: the complement is then a correction set of
  // the allowed part, which is all the map needs.
  for (std::size_t j = 0; j < soft_size_; ++j) {
    if (in[j] || !allowed_[j]) continue;
    IndexSet trial;
    for (std::size_t i = 0; i < soft_size_; ++i) {
      if (in[i] || i == j) trial.push_back(i);
    }
    if (check(trial, true)) {
      in[j] = true;
      absorb_model();
    }
  }
  IndexSet out;
  for (std::size_t i = 0; i < soft_size_; ++i) {
    if (in[i]) out.push_back(i);
  }
  return out;
}

void MinimalUnsatEnumerator::build_counter(std::size_t cap) {
  std::vector<Lit> inputs;
  for (std::size_t i = 0; i < soft_size_; ++i) inputs.push_back(Lit::make(static_cast<Var>(i)));
  auto outs = sequential_counter(
      inputs, cap, [this] { return map_.new_var(); },
      [this](std::vector<Lit> c) { map_.add_clause(std::move(c)); });
  counter_.assign(1, outs);
  counter_cap_ = cap;
}

Lit MinimalUnsatEnumerator::at_least(std::size_t k) {
  if (k > counter_cap_) build_counter(std::min(soft_size_, std::max(2 * counter_cap_, k + 1)));
  return counter_[0][k - 1];
}

std::optional<std::vector<IndexSet>> MinimalUnsatEnumerator::next_level() {
  while (!exhausted_) {
    ++level_;
    if (level_ > soft_size_) {
      exhausted_ = true;
      break;
    }
    std::vector<IndexSet> found;
    for (;;) {
      std::vector<Lit> bound;
      if (level_ < soft_size_) bound.push_back(~at_least(level_ + 1));
      if (map_.solve(bound) == sat::Status::Unsat) {
        if (bound.empty() || map_.solve() == sat::Status::Unsat) exhausted_ = true;
        break;
      }
      IndexSet seed;
      for (std::size_t i = 0; i < soft_size_; ++i) {
        if (map_.model_value(static_cast<Var>(i))) seed.push_back(i);
      }
      if (!check(seed, true)) {
        IndexSet mus = shrink(std::move(seed));
        block(mus);
        found.push_back(std::move(mus));
      } else {
        IndexSet mss = grow(std::move(seed));
        IndexSet mcs;
        std::size_t m = 0;
        for (std::size_t i = 0; i < soft_size_; ++i) {
          if (m < mss.size() && mss[m] == i) {
            ++m;
          } else if (allowed_[i]) {
            mcs.push_back(i);
          }
        }
        if (mcs.empty()) {
          exhausted_ = true;
          break;
        }
        require_any(mcs);
      }
    }
    if (!found.empty()) {
      std::sort(found.begin(), found.end());
      return found;
    }
  }
  return std::nullopt;
}

IndexSet relevant_indices(std::span<const Formula> formulas,
                          const std::set<std::string>& seed_atoms) {
  std::vector<std::set<std::string>> atoms;
  atoms.reserve(formulas.size());
  for (const auto& f : formulas) atoms.push_back(atoms_of(f));
  std::set<std::string> reached = seed_atoms;
  std::vector<bool> taken(formulas.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < formulas.size(); ++i) {
      if (taken[i]) continue;
      bool touches = std::any_of(atoms[i].begin(), atoms[i].end(),
                                 [&](const std::string& a) { return reached.contains(a); });
      if (!touches) continue;
      taken[i] = true;
      changed = true;
      reached.insert(atoms[i].begin(), atoms[i].end());
    }
  }
  IndexSet out;
  for (std::size_t i = 0; i < formulas.size(); ++i) {
    if (taken[i]) out.push_back(i);
  }
  return out;
}

}  // namespace drhai
