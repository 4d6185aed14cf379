#include "drhai/cnf.hpp"

namespace drhai {

using sat::Lit;
using sat::Var;

Encoder::Encoder(std::function<Var(VarRole)> new_var,
                 std::function<void(std::vector<Lit>)> emit)
    : new_var_(std::move(new_var)), emit_(std::move(emit)) {}

Lit Encoder::atom(const std::string& name) {
  auto it = atoms_.find(name);
  if (it == atoms_.end()) it = atoms_.emplace(name, new_var_(VarRole::Atom)).first;
  return Lit::make(it->second);
}

std::optional<Lit> Encoder::find_atom(const std::string& name) const {
  auto it = atoms_.find(name);
  if (it == atoms_.end()) return std::nullopt;
  return Lit::make(it->second);
}

void Encoder::add_hard(const Formula& f) {
  std::vector<std::vector<Lit>> clauses;
  clausify(f, true, clauses);
  for (auto& c : clauses) emit_(std::move(c));
}

Lit Encoder::add_guarded(const Formula& f) {
  std::vector<std::vector<Lit>> clauses;
  clausify(f, true, clauses);
  const Lit selector = Lit::make(new_var_(VarRole::Selector));
  for (auto& c : clauses) {
    c.push_back(~selector);
    emit_(std::move(c));
  }
  return selector;
}

Lit Encoder::literal_for(const Formula& f) {
  std::vector<Lit> lits;
  disjuncts(f, true, lits);
  if (lits.size() == 1) return lits[0];
  return define(f);
}

void Encoder::clausify(const Formula& f, bool positive,
                       std::vector<std::vector<Lit>>& out) {
  switch (f.kind()) {
    case Connective::Not:
      clausify(f.child(), !positive, out);
      return;
    case Connective::And:
      if (positive) {
        clausify(f.left(), true, out);
        clausify(f.right(), true, out);
        return;
      }
      break;
    case Connective::Or:
      if (!positive) {
        clausify(f.left(), false, out);
        clausify(f.right(), false, out);
        return;
      }
      break;
    case Connective::Implies:
      if (!positive) {
        clausify(f.left(), true, out);
        clausify(f.right(), false, out);
        return;
      }
      break;
    default:
      break;
  }
  std::vector<Lit> clause;
  disjuncts(f, positive, clause);
  out.push_back(std::move(clause));
}

void Encoder::disjuncts(const Formula& f, bool positive, std::vector<Lit>& out) {
  switch (f.kind()) {
    case Connective::Atom: {
      Lit l = atom(f.name());
      out.push_back(positive ? l : ~l);
      return;
    }
    case Connective::Not:
      disjuncts(f.child(), !positive, out);
      return;
    case Connective::Or:
      if (positive) {
        disjuncts(f.left(), true, out);
        disjuncts(f.right(), true, out);
        return;
      }
      break;
    case Connective::And:
      if (!positive) {
        disjuncts(f.left(), false, out);
        disjuncts(f.right(), false, out);
        return;
      }
      break;
    case Connective::Implies:
      if (positive) {
        disjuncts(f.left(), false, out);
        disjuncts(f.right(), true, out);
        return;
      }
      break;
    default:
      break;
  }
  Lit x = define(f);
  out.push_back(positive ? x : ~x);
}

Lit Encoder::define(const Formula& f) {
  if (f.kind() == Connective::Atom) return atom(f.name());
  if (f.kind() == Connective::Not) return ~define(f.child());
  if (auto it = definitions_.find(f); it != definitions_.end()) return it->second;

  const Lit l = define(f.left());
  const Lit r = define(f.right());
  const Lit x = Lit::make(new_var_(VarRole::Auxiliary));
  switch (f.kind()) {
    case Connective::And:
      emit_({~x, l});
      emit_({~x, r});
      emit_({x, ~l, ~r});
      break;
    case Connective::Or:
      emit_({~x, l, r});
      emit_({x, ~l});
      emit_({x, ~r});
      break;
    case Connective::Implies:
      emit_({~x, ~l, r});
      emit_({x, l});
      emit_({x, ~r});
      break;
    case Connective::Iff:
      emit_({~x, ~l, r});
      emit_({~x, l, ~r});
      emit_({x, l, r});
      emit_({x, ~l, ~r});
      break;
    default:
      break;
  }
  definitions_.emplace(f, x);
  return x;
}

ClauseSet compile(const KnowledgeBase& kb, std::span<const Formula> extra) {
  ClauseSet cs;
  Encoder enc(
      [&cs](VarRole role) {
        cs.roles.push_back(role);
        return cs.num_vars++;
      },
      [&cs](std::vector<Lit> c) { cs.clauses.push_back(std::move(c)); });
  for (const auto& f : kb) cs.selectors.push_back(enc.add_guarded(f).var());
  for (const auto& f : extra) enc.add_hard(f);
  cs.atom_to_var = enc.atoms();
  return cs;
}

}  // namespace drhai
