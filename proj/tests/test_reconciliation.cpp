#include <doctest.h>

#include <algorithm>

#include "drhai/errors.hpp"
#include "drhai/reconciliation.hpp"
#include "oracle.hpp"
#include "running_example.hpp"

using namespace drhai;
using example::f;

namespace {

std::vector<Formula> fs(std::initializer_list<const char*> texts) {
  std::vector<Formula> out;
  for (const char* t : texts) out.push_back(parse_formula(t));
  return out;
}

Argument arg(std::initializer_list<const char*> premises, const char* claim) {
  return Argument{fs(premises), parse_formula(claim)};
}

Ratio oracle_semantic(const KnowledgeBase& e, const KnowledgeBase& r) {
  auto vocab = e.atoms();
  const auto more = r.atoms();
  vocab.insert(more.begin(), more.end());
  const auto le = oracle::entailed_literals(e.formulas(), vocab);
  const auto lr = oracle::entailed_literals(r.formulas(), vocab);
  std::size_t shared = 0;
  for (const auto& l : le) shared += lr.contains(l) ? 1 : 0;
  if (le.empty() && lr.empty()) return {1, 1};
  return {2 * shared, le.size() + lr.size()};
}

bool same_set(std::vector<Formula> a, std::vector<Formula> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

TEST_SUITE("reconciliation") {
  TEST_CASE("success procedure on the running example") {
    const DialogueState d = run_dialogue(example::kb_r(), example::kb_e(), {f("c")});
    const SuccessResult r = success_procedure(example::kb_e(), d.store(Agent::Explainer),
                                              queried_topic(d));
    REQUIRE(r.updates.size() == 3);
    CHECK(r.updates[0].argument_applied == arg({"f", "f -> h"}, "h"));
    CHECK(r.updates[1].argument_applied == arg({"h", "h -> !e"}, "!e"));
    CHECK(r.updates[2].argument_applied == arg({"a", "b", "a & b -> c"}, "c"));
    CHECK(r.updates[0].retracted.size() == 1);
    CHECK(r.updates[1].retracted.size() == 1);
    CHECK(r.updates[2].retracted.empty());
    // Lexicographic tie-break among {i} and {i -> !f}.
    CHECK(r.updates[0].retracted == fs({"i"}));
    CHECK(r.updates[1].retracted == fs({"e"}));
    CHECK(oracle::satisfiable(r.kb.formulas()));
    CHECK(oracle::entails(r.kb.formulas(), f("c")));
    CHECK(queried_topic(d) == fs({"c", "h"}));

    const Ratio expected[] = {{4, 12}, {8, 13}, {14, 16}};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto rep = similarity(r.updates[i].resulting_kb, example::kb_r());
      CHECK(rep.syntactic.num == expected[i].num);
      CHECK(rep.syntactic.den == expected[i].den);
      const Ratio sem = oracle_semantic(r.updates[i].resulting_kb, example::kb_r());
      CHECK(rep.semantic.num == sem.num);
      CHECK(rep.semantic.den == sem.den);
      CHECK(rep.sigma == doctest::Approx(0.5 * rep.syntactic.value() + 0.5 * rep.semantic.value()));
    }
  }

  TEST_CASE("similarity before any update") {
    const auto rep = similarity(example::kb_e(), example::kb_r());
    CHECK(rep.syntactic == Ratio{0, 11});
    const Ratio sem = oracle_semantic(example::kb_e(), example::kb_r());
    CHECK(rep.semantic.num == sem.num);
    CHECK(rep.semantic.den == sem.den);
    CHECK(rep.vocabulary.size() == 7);
  }

  TEST_CASE("update retracts a minimum correction set and keeps protected formulas") {
    const KnowledgeBase kb = load_kb("p\np -> q\nr\nr -> q\ns");
    const UpdateRecord u = update_kb(kb, arg({"!q"}, "!q"), {});
    // Two formulas from different pairs must go.
    CHECK(u.retracted.size() == 2);
    CHECK(oracle::satisfiable(u.resulting_kb.formulas()));
    CHECK(u.added == fs({"!q"}));
    CHECK(u.resulting_kb.contains(f("s")));
    const auto brute = oracle::minimum_correction_set(fs({"!q"}), kb.formulas());
    CHECK(brute.size() == 2);

    const UpdateRecord v = update_kb(kb, arg({"!q"}, "!q"), fs({"p", "r"}));
    CHECK(same_set(v.retracted, fs({"p -> q", "r -> q"})));

    CHECK_THROWS_AS(update_kb(kb, arg({"a", "!a"}, "b"), {}), PreconditionError);
    CHECK_THROWS_AS(update_kb(kb, arg({"!q"}, "!q"), fs({"q"})), Error);
  }

  TEST_CASE("an entailed topic needs no update") {
    CommitmentStore empty;
    const auto r = success_procedure(load_kb("a"), empty, {f("a")});
    CHECK(r.updates.empty());
    CHECK_THROWS_AS(success_procedure(load_kb("b"), empty, {f("a")}), Error);
  }

  TEST_CASE("single-shot explanation") {
    const auto x = single_shot_explanation(example::kb_r(), example::kb_e(), f("c"));
    CHECK(x.additions == fs({"a", "b", "a & b -> c"}));
    REQUIRE(x.removals.size() == 1);
    CHECK((x.removals[0] == f("e") || x.removals[0] == f("e -> !c")));
    CHECK(x.removals == fs({"e"}));
    const KnowledgeBase updated = apply_explanation(example::kb_e(), x);
    CHECK(oracle::satisfiable(updated.formulas()));
    CHECK(oracle::entails(updated.formulas(), f("c")));

    CHECK_THROWS_AS(single_shot_explanation(example::kb_r(), example::kb_e(), f("i")),
                    PreconditionError);
    CHECK_THROWS_AS(single_shot_explanation(load_kb("a"), load_kb("a"), f("a")), PreconditionError);
  }

  TEST_CASE("similarity properties on random pairs") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      oracle::FormulaGen gen(seed, oracle::atom_names(5));
      std::vector<Formula> pool = gen.distinct(8, 2);
      KnowledgeBase e, r;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (i % 3 != 2) e.add(pool[i]);
        if (i % 3 != 0) r.add(pool[i]);
      }
      if (!oracle::satisfiable(e.formulas()) || !oracle::satisfiable(r.formulas())) continue;
      const auto a = similarity(e, r, 0.3);
      const auto b = similarity(r, e, 0.3);
      CHECK(a.syntactic == b.syntactic);
      CHECK(a.semantic == b.semantic);
      CHECK(a.sigma == doctest::Approx(b.sigma));
      CHECK(a.sigma >= 0.0);
      CHECK(a.sigma <= 1.0);
      const Ratio sem = oracle_semantic(e, r);
      CHECK(a.semantic.num == sem.num);
      CHECK(a.semantic.den == sem.den);
      CHECK(similarity(e, e).sigma == doctest::Approx(1.0));
    }
    CHECK(similarity(KnowledgeBase{}, KnowledgeBase{}).sigma == doctest::Approx(1.0));
    CHECK_THROWS_AS(similarity(example::kb_e(), example::kb_r(), 1.5), PreconditionError);
  }
}
