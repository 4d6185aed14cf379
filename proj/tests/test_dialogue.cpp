#include <doctest.h>

#include <algorithm>

#include "drhai/benchmark.hpp"
#include "drhai/dialogue.hpp"
#include "drhai/errors.hpp"
#include "drhai/transcript.hpp"
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

std::vector<Move> golden() {
  return {
      Move::query(f("c")),
      Move::support(f("c"), arg({"a", "b", "a & b -> c"}, "c")),
      Move::refute(Agent::Explainee, f("c"), arg({"e", "e -> !c"}, "!c")),
      Move::refute(Agent::Explainer, f("e"), arg({"h", "h -> !e"}, "!e")),
      Move::query(f("h")),
      Move::support(f("h"), arg({"f", "f -> h"}, "h")),
      Move::refute(Agent::Explainee, f("f"), arg({"i", "i -> !f"}, "!f")),
      Move::agree(Agent::Explainer),
      Move::agree(Agent::Explainee),
  };
}

DialogueState start() { return DialogueState::start(example::kb_r(), example::kb_e(), {f("c")}); }

DialogueState prefix(std::size_t n) {
  auto moves = golden();
  moves.resize(n);
  return replay(start(), moves);
}

bool contains(const std::vector<Move>& moves, Move m, std::size_t t) {
  m.t = t;
  return std::find(moves.begin(), moves.end(), m) != moves.end();
}

}  // namespace

TEST_SUITE("dialogue") {
  TEST_CASE("running example follows the reference trace") {
    const DialogueState d = run_dialogue(example::kb_r(), example::kb_e(), {f("c")});
    const auto expected = golden();
    REQUIRE(d.history().size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      Move m = expected[i];
      m.t = i + 1;
      CHECK_MESSAGE(d.history()[i] == m, format_move(d.history()[i]));
    }
    CHECK(d.terminated());
    CHECK(is_well_formed(d));
  }

  TEST_CASE("commitment stores after the dialogue") {
    const DialogueState d = prefix(9);
    const auto& cs_r = d.store(Agent::Explainer);
    CHECK(cs_r.arguments().size() == 3);
    CHECK(cs_r.has_argument(arg({"h", "h -> !e"}, "!e")));
    const auto& cs_e = d.store(Agent::Explainee);
    CHECK(cs_e.queried(f("c")));
    CHECK(cs_e.queried(f("h")));
    CHECK_FALSE(cs_e.queried(f("f")));
    CHECK(cs_e.uttered().contains(f("i -> !f")));
  }

  TEST_CASE("legal moves after m2") {
    const auto s = prefix(2);
    const auto moves = legal_moves(s, Agent::Explainee);
    CHECK(contains(moves, Move::refute(Agent::Explainee, f("c"), arg({"e", "e -> !c"}, "!c")), 3));
    CHECK(contains(moves, Move::query(f("a & b -> c")), 3));
    // c was queried already; agree-to-disagree waits while other moves exist.
    CHECK_FALSE(contains(moves, Move::query(f("c")), 3));
    CHECK_FALSE(contains(moves, Move::agree(Agent::Explainee), 3));
  }

  TEST_CASE("legal moves after m4") {
    const auto moves = legal_moves(prefix(4), Agent::Explainee);
    CHECK(contains(moves, Move::query(f("h")), 5));
    CHECK(contains(moves, Move::query(f("h -> !e")), 5));
    // The refutation of c is already in the explainee's store.
    CHECK_FALSE(contains(moves, Move::refute(Agent::Explainee, f("c"), arg({"e", "e -> !c"}, "!c")), 5));
    // Queries only reach explainer premises, never claims.
    CHECK_FALSE(contains(moves, Move::query(f("!e")), 5));
  }

  TEST_CASE("explainer's two counterarguments against e") {
    const auto moves = legal_moves(prefix(3), Agent::Explainer);
    CHECK(moves.size() == 2);
    CHECK(contains(moves, Move::refute(Agent::Explainer, f("e"), arg({"h", "h -> !e"}, "!e")), 4));
    CHECK(contains(moves, Move::refute(Agent::Explainer, f("e"), arg({"h -> !e", "f", "f -> h"}, "!e")), 4));
  }

  TEST_CASE("strategy picks on prefixes") {
    const auto g = golden();
    for (std::size_t n : {3u, 6u, 7u}) {
      const auto s = prefix(n);
      Move expected = g[n];
      expected.t = n + 1;
      CHECK(next_move(s, s.agent_to_move(), Strategies{}.of(s.agent_to_move())) == expected);
    }
  }

  TEST_CASE("illegal moves are rejected with the failing precondition") {
    const auto s = prefix(2);
    // Support from the explainee is not a move it may make.
    CHECK_THROWS_AS(apply_move(s, Move::support(f("c"), arg({"e", "e -> !c"}, "!c"))),
                    ProtocolError);
    // Support needs the opponent's query just before it.
    const auto s3 = prefix(3);
    try {
      apply_move(s3, Move::support(f("c"), arg({"a", "b", "a & b -> c"}, "c")));
      FAIL("expected a protocol error");
    } catch (const ProtocolError& e) {
      CHECK(std::string(e.what()).find("support precondition (1)") != std::string::npos);
    }
    CHECK(violated_precondition(s3, Move::query(f("h"))).has_value());
    CHECK_FALSE(violated_precondition(s3, Move::refute(Agent::Explainer, f("e"),
                                                       arg({"h", "h -> !e"}, "!e")))
                    .has_value());
    // Unchanged after a rejected move.
    CHECK(s3.history().size() == 3);
  }

  TEST_CASE("refute needs something new") {
    const auto s = prefix(4);
    // Repeating the same argument, or one whose claim the mover already holds.
    auto v = violated_precondition(
        s, Move::refute(Agent::Explainee, f("c"), arg({"e", "e -> !c"}, "!c")));
    REQUIRE(v);
    CHECK(v->find("refute precondition (2)") != std::string::npos);
  }

  TEST_CASE("wrong agent and terminated dialogues") {
    const auto s = prefix(2);
    CHECK_THROWS_AS(legal_moves(s, Agent::Explainer), ProtocolError);
    CHECK_THROWS_AS(next_move(s, Agent::Explainer, Strategy::explainer_default()), ProtocolError);
    const auto done = prefix(9);
    CHECK(done.terminated());
    CHECK_THROWS_AS(legal_moves(done, Agent::Explainee), ProtocolError);
    CHECK_THROWS_AS(apply_move(done, Move::query(f("a"))), ProtocolError);
  }

  TEST_CASE("well-formedness") {
    CHECK(is_well_formed(prefix(9)));
    CHECK_FALSE(is_well_formed(prefix(5)));
    // m3 and m5 swapped: query(h) before h was ever uttered.
    auto g = golden();
    std::swap(g[2], g[4]);
    std::vector<Move> stamped;
    DialogueState s = start();
    bool legal = true;
    for (auto m : g) {
      m.t = s.next_timestep();
      if (violated_precondition(s, m)) {
        legal = false;
        break;
      }
      s = commit_move(s, m);
    }
    CHECK_FALSE(legal);
  }

  TEST_CASE("start preconditions") {
    CHECK_THROWS_AS(DialogueState::start(load_kb("a\n!a"), load_kb(""), {f("a")}), PreconditionError);
    CHECK_THROWS_AS(DialogueState::start(load_kb("a"), load_kb(""), {}), PreconditionError);
    CHECK_THROWS_AS(DialogueState::start(load_kb("a"), load_kb(""), {f("b")}), PreconditionError);
    CHECK_THROWS_AS(DialogueState::start(load_kb("a"), load_kb("a"), {f("a")}), PreconditionError);
  }

  TEST_CASE("nothing to dispute") {
    const auto d = run_dialogue(load_kb("a"), load_kb(""), {f("a")});
    REQUIRE(d.history().size() == 3);
    CHECK(d.history()[1].locution == Locution::Support);
    CHECK(d.history()[2] == Move{3, Agent::Explainee, Locution::AgreeToDisagree, {}, {}});
  }

  TEST_CASE("move budget is a hard stop") {
    CHECK_THROWS_AS(run_dialogue(example::kb_r(), example::kb_e(), {f("c")}, {}, 4), BudgetExceeded);
  }

  TEST_CASE("transcript text and JSON round trip") {
    const auto d = prefix(9);
    const std::string text = format_transcript(d.history());
    CHECK(text.find("4 | explainer | refute | e | h, h -> !e => !e") != std::string::npos);
    CHECK(parse_transcript(text) == d.history());
    for (const auto& m : d.history()) CHECK(move_from_json(move_to_json(m)) == m);
    const auto j = dialogue_to_json(d);
    CHECK(j.at("terminated") == true);
    CHECK(j.at("moves").size() == 9);
    CHECK_THROWS_AS(parse_move("1 | explainee | shout | c | -"), ParseError);
  }

  TEST_CASE("random pairs terminate with a legal move at every turn") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      ExperimentConfig cfg;
      cfg.kb_size = 8 + seed % 5 * 6;
      const double c = seed % 3 == 0 ? 0.2 : seed % 3 == 1 ? 0.5 : 0.8;
      const KbPair pair = derive_kb_pair(generate_inconsistent_kb(cfg, seed), c, seed + 100);
      Formula q = Formula::atom("p0");
      try {
        q = select_query(pair.kb_r, pair.kb_e, seed);
      } catch (const PreconditionError&) {
        continue;
      }
      DialogueState s = DialogueState::start(pair.kb_r, pair.kb_e, {q});
      const Strategies st;
      const std::size_t budget = default_move_budget(pair.kb_r, pair.kb_e);
      while (!s.terminated()) {
        REQUIRE(s.history().size() < budget);
        LegalMoveQuery lq;
        lq.per_target_limit = 1;
        CHECK_FALSE(legal_moves(s, s.agent_to_move(), lq).empty());
        const Move m = next_move(s, s.agent_to_move(), st.of(s.agent_to_move()));
        CHECK_FALSE(violated_precondition(s, m).has_value());
        s = commit_move(s, m);
      }
      CHECK(is_well_formed(s));
    }
  }
}
