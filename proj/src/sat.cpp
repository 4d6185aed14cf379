#include "drhai/sat.hpp"

#include <algorithm>
#include <cassert>

#include "drhai/errors.hpp"

namespace drhai::sat {

namespace {

constexpr double kVarDecay = 0.95;
constexpr double kClauseDecay = 0.999;
constexpr int kRestartBase = 100;

// Luby sequence value for index x (0-based), scaled by y^k.
double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  double r = 1;
  for (int i = 0; i < seq; ++i) r *= y;
  return r;
}

}  // namespace

Var Solver::new_var() {
  Var v = num_vars();
  assigns_.push_back(0);
  polarity_.push_back(true);  // branch negative first
  level_.push_back(0);
  reason_.push_back(kNoReason);
  activity_.push_back(0.0);
  heap_pos_.push_back(-1);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

bool Solver::add_clause(std::vector<Lit> lits) {
  if (!ok_) return false;
  assert(decision_level() == 0);
  std::sort(lits.begin(), lits.end());
  std::vector<Lit> out;
  out.reserve(lits.size());
  for (std::size_t i = 0; i < lits.size(); ++i) {
    Lit l = lits[i];
    if (value(l) == 1 || (i + 1 < lits.size() && lits[i + 1] == ~l)) return true;
    if (value(l) == -1) continue;
    if (!out.empty() && out.back() == l) continue;
    out.push_back(l);
  }
  if (out.empty()) {
    ok_ = false;
    return false;
  }
  if (out.size() == 1) {
    enqueue(out[0], kNoReason);
    if (propagate() != kNoReason) ok_ = false;
    return ok_;
  }
  clauses_.push_back(Clause{std::move(out)});
  attach(static_cast<CRef>(clauses_.size() - 1));
  return true;
}

void Solver::attach(CRef cr) {
  const auto& c = clauses_[cr].lits;
  watches_[(~c[0]).code].push_back({cr, c[1]});
  watches_[(~c[1]).code].push_back({cr, c[0]});
}

void Solver::enqueue(Lit l, CRef reason) {
  Var v = l.var();
  assigns_[v] = l.negative() ? -1 : 1;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(l);
}

Solver::CRef Solver::propagate() {
  CRef conflict = kNoReason;
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    ++stats_.propagations;
    auto& ws = watches_[p.code];
    std::size_t i = 0, j = 0;
    const Lit false_lit = ~p;
    while (i < ws.size()) {
      Watcher w = ws[i];
      if (value(w.blocker) == 1) {
        ws[j++] = ws[i++];
        continue;
      }
      Clause& c = clauses_[w.cref];
      if (c.removed) {
        ++i;
        continue;
      }
      auto& lits = c.lits;
      if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
      ++i;
      Lit first = lits[0];
      Watcher nw{w.cref, first};
      if (first != w.blocker && value(first) == 1) {
        ws[j++] = nw;
        continue;
      }
      bool found = false;
      for (std::size_t k = 2; k < lits.size(); ++k) {
        if (value(lits[k]) != -1) {
          std::swap(lits[1], lits[k]);
          watches_[(~lits[1]).code].push_back(nw);
          found = true;
          break;
        }
      }
      if (found) continue;
      ws[j++] = nw;
      if (value(first) == -1) {
        conflict = w.cref;
        qhead_ = trail_.size();
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (conflict != kNoReason) break;
  }
  return conflict;
}

bool Solver::redundant(Lit l) const {
  // A literal is redundant if every other literal of its reason is already
  // in the learnt clause or fixed at level 0 (local minimization).
  CRef r = reason_[l.var()];
  if (r == kNoReason) return false;
  for (Lit q : clauses_[r].lits) {
    if (q.var() == l.var()) continue;
    if (!seen_[q.var()] && level(q.var()) > 0) return false;
  }
  return true;
}

void Solver::analyze(CRef conflict, std::vector<Lit>& learnt,
                     int& backtrack_level) {
  int pending = 0;
  Lit p{-2};
  learnt.clear();
  learnt.push_back(Lit{});
  std::size_t index = trail_.size();
  CRef cr = conflict;
  do {
    Clause& c = clauses_[cr];
    if (c.learnt) bump_clause(c);
    for (Lit q : c.lits) {
      if (p.code >= 0 && q == p) continue;
      Var v = q.var();
      if (!seen_[v] && level(v) > 0) {
        seen_[v] = 1;
        bump_var(v);
        if (level(v) >= decision_level()) {
          ++pending;
        } else {
          learnt.push_back(q);
        }
      }
    }
    while (!seen_[trail_[--index].var()]) {
    }
    p = trail_[index];
    cr = reason_[p.var()];
    seen_[p.var()] = 0;
    --pending;
  } while (pending > 0);
  learnt[0] = ~p;

  std::vector<Lit> kept{learnt[0]};
  for (std::size_t i = 1; i < learnt.size(); ++i) {
    if (!redundant(learnt[i])) kept.push_back(learnt[i]);
  }
  for (Lit l : learnt) seen_[l.var()] = 0;
  learnt.swap(kept);

  if (learnt.size() == 1) {
    backtrack_level = 0;
  } else {
    std::size_t max_i = 1;
    for (std::size_t i = 2; i < learnt.size(); ++i) {
      if (level(learnt[i].var()) > level(learnt[max_i].var())) max_i = i;
    }
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = level(learnt[1].var());
  }
}

void Solver::analyze_final(Lit p) {
  // Collect the assumptions implying ~p.
  failed_.clear();
  failed_.push_back(p);
  if (decision_level() == 0) {
    failed_[0] = ~p;
    return;
  }
  seen_[p.var()] = 1;
  for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[0]; --i) {
    Var v = trail_[i].var();
    if (!seen_[v]) continue;
    if (reason_[v] == kNoReason) {
      if (level(v) > 0) failed_.push_back(~trail_[i]);
    } else {
      for (Lit q : clauses_[reason_[v]].lits) {
        if (q.var() != v && level(q.var()) > 0) seen_[q.var()] = 1;
      }
    }
    seen_[v] = 0;
  }
  seen_[p.var()] = 0;
  // failed_ holds negations of assumptions; report the assumptions as given.
  for (Lit& l : failed_) l = ~l;
  std::sort(failed_.begin(), failed_.end());
  failed_.erase(std::unique(failed_.begin(), failed_.end()), failed_.end());
}

void Solver::cancel_until(int lvl) {
  if (decision_level() <= lvl) return;
  for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[lvl]; --i) {
    Var v = trail_[i].var();
    assigns_[v] = 0;
    reason_[v] = kNoReason;
    polarity_[v] = trail_[i].negative();
    if (heap_pos_[v] < 0) heap_insert(v);
  }
  trail_.resize(trail_lim_[lvl]);
  trail_lim_.resize(lvl);
  qhead_ = trail_.size();
}

Lit Solver::pick_branch() {
  while (!heap_.empty()) {
    Var v = heap_pop();
    if (assigns_[v] == 0) return Lit::make(v, polarity_[v]);
  }
  return Lit{-2};
}

void Solver::bump_var(Var v) {
  activity_[v] += var_inc_;
  if (activity_[v] > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
}

void Solver::bump_clause(Clause& c) {
  c.activity += clause_inc_;
  if (c.activity > 1e20) {
    for (auto& cl : clauses_) {
      if (cl.learnt) cl.activity *= 1e-20;
    }
    clause_inc_ *= 1e-20;
  }
}

void Solver::reduce_db() {
  std::vector<CRef> learnts;
  for (CRef i = 0; i < clauses_.size(); ++i) {
    const Clause& c = clauses_[i];
    if (c.learnt && !c.removed && c.lits.size() > 2) learnts.push_back(i);
  }
  std::stable_sort(learnts.begin(), learnts.end(), [this](CRef a, CRef b) {
    return clauses_[a].activity < clauses_[b].activity;
  });
  auto locked = [this](CRef cr) {
    const Clause& c = clauses_[cr];
    Var v = c.lits[0].var();
    return value(c.lits[0]) == 1 && reason_[v] == cr;
  };
  std::size_t removed = 0;
  for (std::size_t i = 0; i < learnts.size() / 2; ++i) {
    if (locked(learnts[i])) continue;
    Clause& c = clauses_[learnts[i]];
    c.removed = true;
    c.lits.clear();
    c.lits.shrink_to_fit();
    ++removed;
  }
  num_learnts_ -= removed;
  for (auto& ws : watches_) {
    std::erase_if(ws, [this](const Watcher& w) { return clauses_[w.cref].removed; });
  }
}

void Solver::check_budget(std::chrono::steady_clock::time_point start,
                          std::uint64_t conflicts_at_start) const {
  const auto now = std::chrono::steady_clock::now();
  if (stats_.conflicts - conflicts_at_start > budget_.max_conflicts) {
    throw BudgetExceeded("solver conflict budget exceeded");
  }
  if (now - start > budget_.max_time) {
    throw BudgetExceeded("solver time budget exceeded");
  }
  if (budget_.deadline && now > *budget_.deadline) {
    throw BudgetExceeded("deadline reached");
  }
}

Status Solver::solve(std::span<const Lit> assumptions) {
  ++stats_.solves;
  failed_.clear();
  if (!ok_) return Status::Unsat;
  assumptions_.assign(assumptions.begin(), assumptions.end());
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t conflicts_at_start = stats_.conflicts;
  int restarts = 0;
  std::vector<Lit> learnt;

  struct Reset {
    Solver* s;
    ~Reset() { s->cancel_until(0); }
  } reset{this};

  if (budget_.deadline && start > *budget_.deadline) {
    throw BudgetExceeded("deadline reached");
  }

  for (;;) {
    const auto conflict_limit =
        static_cast<std::uint64_t>(luby(2.0, restarts) * kRestartBase);
    std::uint64_t conflicts_this_restart = 0;
    for (;;) {
      CRef confl = propagate();
      if (confl != kNoReason) {
        ++stats_.conflicts;
        ++conflicts_this_restart;
        if (decision_level() == 0) {
          ok_ = false;
          return Status::Unsat;
        }
        int bt = 0;
        analyze(confl, learnt, bt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          clauses_.push_back(Clause{learnt, 0.0, true, false});
          CRef cr = static_cast<CRef>(clauses_.size() - 1);
          attach(cr);
          bump_clause(clauses_[cr]);
          enqueue(learnt[0], cr);
          ++num_learnts_;
        }
        var_inc_ /= kVarDecay;
        clause_inc_ /= kClauseDecay;
        if ((stats_.conflicts & 63) == 0) check_budget(start, conflicts_at_start);
        continue;
      }

      if (conflicts_this_restart >= conflict_limit) {
        cancel_until(0);
        ++restarts;
        break;
      }
      if (num_learnts_ >= max_learnts_ + trail_.size()) {
        reduce_db();
        max_learnts_ += max_learnts_ / 10;
      }

      Lit next{-2};
      while (decision_level() < static_cast<int>(assumptions_.size())) {
        Lit a = assumptions_[decision_level()];
        if (value(a) == 1) {
          trail_lim_.push_back(static_cast<int>(trail_.size()));
        } else if (value(a) == -1) {
          analyze_final(~a);
          return Status::Unsat;
        } else {
          next = a;
          break;
        }
      }
      if (next.code < 0) {
        ++stats_.decisions;
        if ((stats_.decisions & 1023) == 0) check_budget(start, conflicts_at_start);
        next = pick_branch();
        if (next.code < 0) {
          model_.assign(assigns_.size(), false);
          for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == 1;
          return Status::Sat;
        }
      }
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      enqueue(next, kNoReason);
    }
  }
}

// --- heap -----------------------------------------------------------------

bool Solver::heap_less(Var a, Var b) const {
  if (activity_[a] != activity_[b]) return activity_[a] > activity_[b];
  return a < b;
}

void Solver::heap_insert(Var v) {
  heap_pos_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_pos_[v]);
}

void Solver::heap_up(int pos) {
  Var v = heap_[pos];
  while (pos > 0) {
    int parent = (pos - 1) >> 1;
    if (!heap_less(v, heap_[parent])) break;
    heap_[pos] = heap_[parent];
    heap_pos_[heap_[pos]] = pos;
    pos = parent;
  }
  heap_[pos] = v;
  heap_pos_[v] = pos;
}

void Solver::heap_down(int pos) {
  Var v = heap_[pos];
  const int n = static_cast<int>(heap_.size());
  for (;;) {
    int child = 2 * pos + 1;
    if (child >= n) break;
    if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) ++child;
    if (!heap_less(heap_[child], v)) break;
    heap_[pos] = heap_[child];
    heap_pos_[heap_[pos]] = pos;
    pos = child;
  }
  heap_[pos] = v;
  heap_pos_[v] = pos;
}

Var Solver::heap_pop() {
  Var top = heap_[0];
  heap_pos_[top] = -1;
  Var last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[last] = 0;
    heap_down(0);
  }
  return top;
}

}  // namespace drhai::sat
