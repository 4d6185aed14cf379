#include "drhai/argumentation.hpp"

#include <algorithm>
#include <set>

#include "drhai/errors.hpp"

namespace drhai {

std::vector<Formula> Argument::sorted_premises() const {
  std::vector<Formula> out = premises;
  std::sort(out.begin(), out.end());
  return out;
}

bool operator==(const Argument& a, const Argument& b) {
  return a.claim == b.claim && a.premises.size() == b.premises.size() &&
         a.sorted_premises() == b.sorted_premises();
}

std::string format_argument(const Argument& a) {
  std::string out = "<{";
  for (std::size_t i = 0; i < a.premises.size(); ++i) {
    if (i) out += ", ";
    out += format_formula(a.premises[i]);
  }
  return out + "}, " + format_formula(a.claim) + ">";
}

namespace {

bool contains_any(const IndexSet& s, const std::vector<bool>& mask) {
  return std::any_of(s.begin(), s.end(), [&](std::size_t i) { return mask[i]; });
}

}  // namespace

std::vector<IndexSet> argument_premises(std::span<const Formula> source, const Formula& claim,
                                        const SearchConstraints& constraints,
                                        std::size_t limit, const sat::Budget& budget) {
  if (limit == 0) return {};
  if (!is_satisfiable(std::vector<Formula>{complement(claim)}, budget)) {
    // A valid claim has exactly one argument, the empty one.
    const bool banned = std::any_of(constraints.excluded.begin(), constraints.excluded.end(),
                                    [](const IndexSet& s) { return s.empty(); });
    if (banned || constraints.require_one_of) return {};
    return {IndexSet{}};
  }
  // A minimal unsatisfiable set is atom-connected, so only formulas linked
  // to the claim can take part.
  const IndexSet relevant = relevant_indices(source, atoms_of(claim));
  std::vector<bool> fresh(source.size(), !constraints.require_one_of.has_value());
  if (constraints.require_one_of) {
    for (std::size_t i : *constraints.require_one_of) fresh[i] = true;
    if (!std::any_of(relevant.begin(), relevant.end(), [&](std::size_t i) { return fresh[i]; })) {
      return {};
    }
  }

  const std::vector<Formula> local = select(source, relevant);
  std::vector<std::size_t> to_local(source.size(), SIZE_MAX);
  for (std::size_t k = 0; k < relevant.size(); ++k) to_local[relevant[k]] = k;
  auto to_global = [&](const IndexSet& s) {
    IndexSet g;
    for (std::size_t k : s) g.push_back(relevant[k]);
    return g;
  };

  const Formula anchor[] = {complement(claim)};
  MinimalUnsatEnumerator e(local, anchor, budget);
  std::set<IndexSet> excluded;
  for (const auto& s : constraints.excluded) {
    IndexSet l;
    bool inside = true;
    for (std::size_t i : s) {
      if (to_local[i] == SIZE_MAX) {
        inside = false;
        break;
      }
      l.push_back(to_local[i]);
    }
    if (!inside) continue;
    std::sort(l.begin(), l.end());
    e.block(l);
    excluded.insert(to_global(l));
  }
  if (constraints.require_one_of) {
    IndexSet l;
    for (std::size_t k = 0; k < relevant.size(); ++k) {
      if (fresh[relevant[k]]) l.push_back(k);
    }
    e.require_any(l);
  }

  std::vector<IndexSet> out;
  while (out.size() < limit) {
    auto level = e.next_level();
    if (!level) break;
    for (const auto& s : *level) {
      // Shrinking can land on a set that ignores the map constraints, or on
      // a set that is inconsistent without the negated claim.
      IndexSet g = to_global(s);
      if (!contains_any(g, fresh) || excluded.contains(g)) continue;
      if (!e.soft_subset_satisfiable(s)) continue;
      out.push_back(std::move(g));
      if (out.size() == limit) break;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const IndexSet& a, const IndexSet& b) {
    return a.size() < b.size();
  });
  return out;
}

ArgumentList arguments_for(std::span<const Formula> kb, const Formula& claim,
                           std::size_t limit, const sat::Budget& budget) {
  ArgumentList out;
  std::vector<IndexSet> sets;
  try {
    // One extra result tells whether the list is complete.
    sets = argument_premises(kb, claim, {}, limit + 1, budget);
  } catch (const BudgetExceeded&) {
    out.complete = false;
    return out;
  }
  if (sets.size() > limit) {
    sets.resize(limit);
    out.complete = false;
  }
  for (const auto& s : sets) out.arguments.push_back(Argument{select(kb, s), claim});
  return out;
}

bool is_argument(std::span<const Formula> kb, const Argument& a, const sat::Budget& budget) {
  std::set<Formula> seen;
  for (const auto& p : a.premises) {
    if (!seen.insert(p).second) return false;
    if (std::find(kb.begin(), kb.end(), p) == kb.end()) return false;
  }
  if (!is_satisfiable(a.premises, budget)) return false;
  if (!entails(a.premises, a.claim, budget)) return false;
  for (std::size_t drop = 0; drop < a.premises.size(); ++drop) {
    std::vector<Formula> rest;
    for (std::size_t i = 0; i < a.premises.size(); ++i) {
      if (i != drop) rest.push_back(a.premises[i]);
    }
    // Entailment is monotone, so single deletions cover every proper subset.
    if (entails(rest, a.claim, budget)) return false;
  }
  return true;
}

ArgumentList counterarguments_for(std::span<const Formula> source, const Formula& target,
                                  std::size_t limit, const sat::Budget& budget) {
  return arguments_for(source, complement(target), limit, budget);
}

bool is_counterargument(const Argument& a, const Argument& b, const sat::Budget& budget) {
  std::vector<Formula> all = a.premises;
  all.insert(all.end(), b.premises.begin(), b.premises.end());
  return !is_satisfiable(all, budget);
}

}  // namespace drhai
