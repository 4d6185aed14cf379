#include <doctest.h>

#include "drhai/argumentation.hpp"
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

}  // namespace

TEST_SUITE("argumentation") {
  TEST_CASE("two arguments for c") {
    const auto kb = fs({"a", "b", "a & b -> c", "g", "g -> a"});
    const auto brute = oracle::arguments(kb, f("c"));
    REQUIRE(brute == std::vector<oracle::Subset>{{0, 1, 2}, {1, 2, 3, 4}});
    auto r = arguments_for(kb, f("c"), 10);
    CHECK(r.complete);
    REQUIRE(r.arguments.size() == 2);
    CHECK(r.arguments[0] == arg({"a", "b", "a & b -> c"}, "c"));
    CHECK(r.arguments[1] == arg({"b", "g", "g -> a", "a & b -> c"}, "c"));
    // Premises keep knowledge-base order.
    CHECK(r.arguments[1].premises == fs({"b", "a & b -> c", "g", "g -> a"}));
    for (const auto& a : r.arguments) CHECK(is_argument(kb, a));

    auto one = arguments_for(kb, f("c"), 1);
    CHECK_FALSE(one.complete);
    CHECK(one.arguments.size() == 1);
  }

  TEST_CASE("no entailment, no argument") {
    auto r = arguments_for(fs({"a"}), f("b"), 10);
    CHECK(r.complete);
    CHECK(r.arguments.empty());
  }

  TEST_CASE("inconsistent source") {
    const auto kb = fs({"e", "e -> !c", "i", "i -> !f", "a", "b", "a & b -> c"});
    const auto brute = oracle::arguments(kb, f("!a"));
    auto r = arguments_for(kb, f("!a"), 50);
    CHECK(r.complete);
    REQUIRE(r.arguments.size() == brute.size());
    for (std::size_t k = 0; k < brute.size(); ++k) {
      CHECK(r.arguments[k].premises == select(kb, brute[k]));
    }
    const Argument expected = arg({"e", "e -> !c", "b", "a & b -> c"}, "!a");
    CHECK(std::find(r.arguments.begin(), r.arguments.end(), expected) != r.arguments.end());
    // The inconsistent pair {a, ...} never shows up as a premise set.
    for (const auto& a : r.arguments) CHECK(is_satisfiable(a.premises));
  }

  TEST_CASE("is_argument") {
    const auto kb = fs({"a", "b", "a & b -> c", "g", "g -> a"});
    CHECK(is_argument(kb, arg({"a", "b", "a & b -> c"}, "c")));
    CHECK_FALSE(is_argument(fs({"a", "b"}), arg({"a", "b"}, "a")));
    CHECK_FALSE(is_argument(fs({"a", "!a", "b"}), arg({"a", "!a"}, "b")));
    CHECK_FALSE(is_argument(fs({"a"}), arg({"b"}, "b")));
  }

  TEST_CASE("counterarguments from the second knowledge base") {
    const auto kb_j = fs({"l", "d", "l & d -> !b", "e", "e -> !c"});
    const Argument a_i = arg({"a", "b", "a & b -> c"}, "c");
    const Argument a_j1 = arg({"l", "d", "l & d -> !b"}, "!b");
    const Argument a_j2 = arg({"e", "e -> !c"}, "!c");

    auto on_b = counterarguments_for(kb_j, f("b"), 10);
    CHECK(std::find(on_b.arguments.begin(), on_b.arguments.end(), a_j1) != on_b.arguments.end());
    auto on_c = counterarguments_for(kb_j, f("c"), 10);
    CHECK(std::find(on_c.arguments.begin(), on_c.arguments.end(), a_j2) != on_c.arguments.end());
    CHECK(is_counterargument(a_j1, a_i));
    CHECK(is_counterargument(a_j2, a_i));

    CHECK(counterarguments_for(fs({"a"}), f("a"), 10).arguments.empty());
    CHECK_FALSE(is_counterargument(a_i, a_i));
    CHECK(is_counterargument(arg({"a"}, "a"), arg({"!a"}, "!a")));
  }

  TEST_CASE("counterarguments clash with anything that contains the target") {
    oracle::FormulaGen gen(77, oracle::atom_names(5));
    for (int trial = 0; trial < 40; ++trial) {
      auto src = gen.distinct(6 + trial % 5, 1);
      const Formula target = gen(1);
      const Argument holder{{target}, target};
      for (const auto& c : counterarguments_for(src, target, 20).arguments) {
        CHECK(is_counterargument(c, holder));
      }
    }
  }

  TEST_CASE("arguments_for matches subset brute force") {
    oracle::FormulaGen gen(101, oracle::atom_names(6));
    for (int trial = 0; trial < 80; ++trial) {
      const std::size_t n = 3 + trial % 10;
      auto kb = gen.distinct(n, 1 + trial % 2);
      const Formula claim = gen(1);
      const auto expected = oracle::arguments(kb, claim);
      auto got = arguments_for(kb, claim, 100000);
      CHECK(got.complete);
      REQUIRE(got.arguments.size() == expected.size());
      for (std::size_t k = 0; k < expected.size(); ++k) {
        CHECK(got.arguments[k].premises == select(kb, expected[k]));
      }
    }
  }

  TEST_CASE("search constraints") {
    const auto kb = example::kb_r().formulas();
    // Arguments for !e: {h, h -> !e} and {h -> !e, f, f -> h}.
    auto all = argument_premises(kb, f("!e"), {}, 10);
    CHECK(all == std::vector<IndexSet>{{3, 4}, {4, 5, 6}});
    SearchConstraints c;
    c.excluded = {{3, 4}};
    CHECK(argument_premises(kb, f("!e"), c, 10) == std::vector<IndexSet>{{4, 5, 6}});
    SearchConstraints fresh;
    fresh.require_one_of = IndexSet{5};
    CHECK(argument_premises(kb, f("!e"), fresh, 10) == std::vector<IndexSet>{{4, 5, 6}});
    fresh.require_one_of = IndexSet{0, 1};
    CHECK(argument_premises(kb, f("!e"), fresh, 10).empty());
  }
}
