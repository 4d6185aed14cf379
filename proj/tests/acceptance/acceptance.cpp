// Acceptance checks: one PASS/FAIL line per criterion.
//   acceptance [path-to-drhai-cli]
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "drhai/argumentation.hpp"
#include "drhai/benchmark.hpp"
#include "drhai/dialogue.hpp"
#include "drhai/entailment.hpp"
#include "drhai/errors.hpp"
#include "drhai/reconciliation.hpp"
#include "drhai/transcript.hpp"
#include "oracle.hpp"
#include "running_example.hpp"

using namespace drhai;
using example::f;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::vector<Formula> fs(std::initializer_list<const char*> texts) {
  std::vector<Formula> out;
  for (const char* t : texts) out.push_back(parse_formula(t));
  return out;
}

Argument arg(std::initializer_list<const char*> premises, const char* claim) {
  return Argument{fs(premises), parse_formula(claim)};
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Fails the outcome with the first message only.
void expect(Outcome& o, bool ok, const std::string& what) {
  if (!ok && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

Outcome golden_trace() {
  Outcome o;
  const auto t0 = Clock::now();
  const DialogueState d = run_dialogue(example::kb_r(), example::kb_e(), {f("c")});
  const double secs = seconds_since(t0);
  std::vector<Move> expected = {
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
  for (std::size_t i = 0; i < expected.size(); ++i) expected[i].t = i + 1;
  expect(o, d.history() == expected, "transcript differs:\n" + format_transcript(d.history()));
  expect(o, d.terminated(), "not terminated");
  expect(o, secs < 1.0, "took " + fmt("%.3f", secs) + " s");
  if (o.pass) o.detail = "9 moves in " + fmt("%.4f", secs) + " s";
  return o;
}

Outcome worked_arguments() {
  Outcome o;
  const auto kb = fs({"a", "b", "a & b -> c", "g", "g -> a"});
  const auto brute = oracle::arguments(kb, f("c"));
  const auto r = arguments_for(kb, f("c"), 10);
  std::vector<oracle::Subset> got;
  for (const auto& a : r.arguments) {
    oracle::Subset s;
    for (const auto& p : a.premises) {
      s.push_back(static_cast<std::size_t>(std::find(kb.begin(), kb.end(), p) - kb.begin()));
    }
    std::sort(s.begin(), s.end());
    got.push_back(s);
  }
  expect(o, r.complete && got == brute, "arguments_for differs from brute force");
  expect(o, r.arguments.size() == 2 && r.arguments[0] == arg({"a", "b", "a & b -> c"}, "c") &&
                r.arguments[1] == arg({"b", "g", "g -> a", "a & b -> c"}, "c"),
         "arguments are not A1, A2");

  const auto kb_j = fs({"l", "d", "l & d -> !b", "e", "e -> !c"});
  const Argument a1 = arg({"a", "b", "a & b -> c"}, "c");
  const auto counter_b = counterarguments_for(kb_j, f("b"), 10);
  const auto counter_c = counterarguments_for(kb_j, f("c"), 10);
  const Argument want_b = arg({"l", "d", "l & d -> !b"}, "!b");
  const Argument want_c = arg({"e", "e -> !c"}, "!c");
  auto has = [](const ArgumentList& l, const Argument& a) {
    return std::find(l.arguments.begin(), l.arguments.end(), a) != l.arguments.end();
  };
  expect(o, has(counter_b, want_b) && has(counter_c, want_c), "listed counterarguments not found");
  expect(o, is_counterargument(want_b, a1) && is_counterargument(want_c, a1),
         "is_counterargument rejects a listed counterargument");
  if (o.pass) o.detail = "A1, A2 match brute force; both counterarguments found";
  return o;
}

struct PropertyRun {
  std::size_t dialogues = 0;
  std::size_t max_moves = 0;
  double seconds = 0;
  Outcome termination;
  Outcome success;
};

PropertyRun property_suites() {
  PropertyRun run;
  const auto t0 = Clock::now();
  const double cs[] = {0.2, 0.5, 0.8};
  for (std::uint64_t i = 0; i < 200; ++i) {
    ExperimentConfig cfg;
    cfg.kb_size = 8 + (i * 7) % 53;
    const double c = cs[i % 3];
    std::optional<KbPair> pair;
    std::optional<Formula> query;
    for (std::uint64_t attempt = 0; attempt < 50 && !query; ++attempt) {
      const std::uint64_t seed = mix_seed(1000 + i, attempt);
      pair = derive_kb_pair(generate_inconsistent_kb(cfg, seed), c, mix_seed(seed, 1));
      try {
        query = select_query(pair->kb_r, pair->kb_e, mix_seed(seed, 2));
      } catch (const PreconditionError&) {
      }
    }
    const std::string where = "pair " + std::to_string(i) + " (|KB| " +
                              std::to_string(cfg.kb_size) + ", c " + fmt("%.1f", c) + ")";
    if (!query) {
      expect(run.termination, false, where + ": no usable query");
      continue;
    }
    ++run.dialogues;

    // Termination and deadlock-freedom.
    DialogueState s = DialogueState::start(pair->kb_r, pair->kb_e, {*query});
    const Strategies st;
    const std::size_t budget = default_move_budget(pair->kb_r, pair->kb_e);
    bool stuck = false;
    while (!s.terminated() && s.history().size() <= budget) {
      LegalMoveQuery lq;
      lq.per_target_limit = 1;
      if (legal_moves(s, s.agent_to_move(), lq).empty()) {
        stuck = true;
        break;
      }
      s = commit_move(s, next_move(s, s.agent_to_move(), st.of(s.agent_to_move())));
    }
    expect(run.termination, !stuck, where + ": no legal move at t " + std::to_string(s.next_timestep()));
    expect(run.termination, s.terminated(), where + ": move budget exhausted");
    if (!s.terminated()) continue;
    // Bound: twice the uttered arguments plus queries plus two.
    std::size_t args = 0, queries = 0;
    std::vector<Argument> distinct;
    for (Agent a : {Agent::Explainee, Agent::Explainer}) {
      for (const auto& arg : s.store(a).arguments()) {
        if (std::find(distinct.begin(), distinct.end(), arg) == distinct.end()) distinct.push_back(arg);
      }
    }
    args = distinct.size();
    for (const auto& e : s.store(Agent::Explainee).entries()) queries += e.query ? 1 : 0;
    const std::size_t bound = 2 * (args + queries + 2);
    expect(run.termination, s.history().size() <= bound,
           where + ": " + std::to_string(s.history().size()) + " moves exceed bound " +
               std::to_string(bound));
    expect(run.termination, is_well_formed(s), where + ": not well-formed");
    run.max_moves = std::max(run.max_moves, s.history().size());

    // Success procedure.
    try {
      const auto topic = queried_topic(s);
      const SuccessResult r = success_procedure(pair->kb_e, s.store(Agent::Explainer), topic);
      expect(run.success, is_satisfiable(r.kb.formulas()), where + ": updated KB unsatisfiable");
      for (const auto& phi : topic) {
        expect(run.success, entails(r.kb.formulas(), phi), where + ": topic not entailed");
      }
      std::vector<Formula> added;
      for (const auto& u : r.updates) {
        for (const auto& g : u.retracted) {
          expect(run.success, std::find(added.begin(), added.end(), g) == added.end(),
                 where + ": retracted an added premise " + format_formula(g));
        }
        added.insert(added.end(), u.argument_applied.premises.begin(),
                     u.argument_applied.premises.end());
      }
    } catch (const Error& e) {
      expect(run.success, false, where + ": " + e.what());
    }
  }
  run.seconds = seconds_since(t0);
  expect(run.termination, run.dialogues == 200, "only " + std::to_string(run.dialogues) + " dialogues");
  expect(run.termination, run.seconds < 300, "took " + fmt("%.1f", run.seconds) + " s");
  if (run.termination.pass) {
    run.termination.detail = std::to_string(run.dialogues) + " dialogues, longest " +
                             std::to_string(run.max_moves) + " moves, " + fmt("%.1f", run.seconds) + " s";
  }
  if (run.success.pass) run.success.detail = std::to_string(run.dialogues) + " dialogues reconciled";
  return run;
}

Ratio semantic_oracle(const KnowledgeBase& e, const KnowledgeBase& r) {
  auto vocab = e.atoms();
  const auto more = r.atoms();
  vocab.insert(more.begin(), more.end());
  const auto le = oracle::entailed_literals(e.formulas(), vocab);
  const auto lr = oracle::entailed_literals(r.formulas(), vocab);
  std::size_t shared = 0;
  for (const auto& l : le) shared += lr.contains(l) ? 1 : 0;
  return {2 * shared, le.size() + lr.size()};
}

Outcome similarity_table() {
  Outcome o;
  const DialogueState d = run_dialogue(example::kb_r(), example::kb_e(), {f("c")});
  const SuccessResult r = success_procedure(example::kb_e(), d.store(Agent::Explainer), queried_topic(d));
  expect(o, r.updates.size() == 3, "expected three updates");
  if (!o.pass) return o;
  const Argument order[] = {arg({"f", "f -> h"}, "h"), arg({"h", "h -> !e"}, "!e"),
                            arg({"a", "b", "a & b -> c"}, "c")};
  const Ratio syn[] = {{4, 12}, {8, 13}, {14, 16}};
  const std::size_t gamma[] = {1, 1, 0};
  std::string rows;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& u = r.updates[i];
    expect(o, u.argument_applied == order[i], "update " + std::to_string(i + 1) + " applies the wrong argument");
    expect(o, u.retracted.size() == gamma[i], "update " + std::to_string(i + 1) + " gamma size");
    const auto rep = similarity(u.resulting_kb, example::kb_r());
    expect(o, rep.syntactic.num == syn[i].num && rep.syntactic.den == syn[i].den,
           "syntactic " + format_ratio(rep.syntactic));
    const Ratio sem = semantic_oracle(u.resulting_kb, example::kb_r());
    expect(o, rep.semantic.num == sem.num && rep.semantic.den == sem.den,
           "semantic " + format_ratio(rep.semantic) + " vs oracle " + format_ratio(sem));
    rows += (i ? ", " : "") + format_ratio(rep.syntactic) + " | " + format_ratio(rep.semantic) +
            " | " + fmt("%.3f", rep.sigma);
  }
  if (o.pass) o.detail = "m6, m4, m2 with gamma 1, 1, 0; " + rows;
  return o;
}

Outcome ssr_baseline() {
  Outcome o;
  const auto x = single_shot_explanation(example::kb_r(), example::kb_e(), f("c"));
  expect(o, x.additions == fs({"a", "b", "a & b -> c"}), "additions differ");
  expect(o, x.removals.size() == 1 && (x.removals[0] == f("e") || x.removals[0] == f("e -> !c")),
         "removals are not one of {e, e -> !c}");
  const KnowledgeBase updated = apply_explanation(example::kb_e(), x);
  expect(o, is_satisfiable(updated.formulas()), "updated KB unsatisfiable");
  expect(o, entails(updated.formulas(), f("c")), "updated KB does not entail c");
  if (o.pass) o.detail = "additions {a, b, a & b -> c}, removals {" + format_formula(x.removals[0]) + "}";
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  oracle::FormulaGen gen(4242, oracle::atom_names(6));
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + static_cast<std::size_t>(trial % 9);
    const auto kb = gen.distinct(n, 1 + trial % 2);
    const Formula anchor = gen(1);
    const std::string where = "instance " + std::to_string(trial);

    const auto mus = enumerate_mus(kb, anchor, 1u << 20);
    expect(o, mus.complete && mus.sets == oracle::minimal_unsat_with_anchor(kb, anchor),
           where + ": enumerate_mus");

    std::vector<Formula> hard;
    if (trial % 3 == 0) hard.push_back(gen(0));
    if (oracle::satisfiable(hard)) {
      expect(o, find_mcs(hard, kb) == oracle::minimum_correction_set(hard, kb), where + ": find_mcs");
    }

    const auto args = arguments_for(kb, anchor, 1u << 20);
    const auto brute = oracle::arguments(kb, anchor);
    bool same = args.complete && args.arguments.size() == brute.size();
    for (std::size_t k = 0; same && k < brute.size(); ++k) {
      same = args.arguments[k].premises == select(kb, brute[k]);
    }
    expect(o, same, where + ": arguments_for");
  }
  if (o.pass) o.detail = "100 instances agree with subset brute force";
  return o;
}

Outcome benchmark_grid() {
  Outcome o;
  std::size_t dr_wins = 0, runs = 0;
  double slowest = 0;
  std::string cells;
  for (std::size_t n : {200u, 400u}) {
    for (double c : {0.2, 0.4, 0.6, 0.8}) {
      ExperimentConfig cfg;
      cfg.kb_size = n;
      cfg.conflict_fraction = c;
      cfg.repetitions = 10;
      cfg.seed = 1;
      double dr = 0, ssr = 0;
      for (const auto& r : run_experiment(cfg)) {
        ++runs;
        const std::string where = std::to_string(n) + "/" + fmt("%.1f", c) + " rep " + std::to_string(r.rep);
        expect(o, !r.timeout, where + ": timed out");
        expect(o, r.delta_sigma_dr >= 0.0, where + ": delta sigma DR " + fmt("%.4f", r.delta_sigma_dr));
        expect(o, r.t_seconds < 10.0, where + ": " + fmt("%.2f", r.t_seconds) + " s");
        slowest = std::max(slowest, r.t_seconds);
        dr += r.delta_sigma_dr;
        ssr += r.delta_sigma_ssr;
      }
      dr_wins += dr >= ssr ? 1 : 0;
      cells += " " + fmt("%.2f", dr / 10) + "/" + fmt("%.2f", ssr / 10);
    }
  }
  expect(o, dr_wins >= 6, "DR ahead in only " + std::to_string(dr_wins) + " of 8 cells");
  if (o.pass) {
    o.detail = std::to_string(runs) + " runs, DR >= SSR in " + std::to_string(dr_wins) +
               "/8 cells (mean DR/SSR:" + cells + "), slowest " + fmt("%.3f", slowest) + " s";
  }
  return o;
}

// Drops column 5 (T_seconds).
std::string without_time(const std::string& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col++ != 5) out += cell + ",";
    }
    out += "\n";
  }
  return out;
}

Outcome cli_determinism(const std::string& cli) {
  Outcome o;
  if (cli.empty()) {
    expect(o, false, "no CLI path given");
    return o;
  }
  const auto dir = std::filesystem::temp_directory_path();
  const std::string a = (dir / "drhai_acceptance_a.csv").string();
  const std::string b = (dir / "drhai_acceptance_b.csv").string();
  const std::string flags = " bench --kb-size 120 --conflict-fraction 0.4 --alpha 0.5 --seed 9 --reps 4 --time-limit 60 --out ";
  const int ra = std::system(("\"" + cli + "\"" + flags + a).c_str());
  const int rb = std::system(("\"" + cli + "\"" + flags + b).c_str());
  expect(o, ra == 0 && rb == 0, "CLI exited with an error");
  const std::string ta = without_time(a), tb = without_time(b);
  expect(o, !ta.empty() && std::count(ta.begin(), ta.end(), '\n') == 5, "unexpected CSV shape");
  expect(o, ta == tb, "CSV files differ outside T_seconds");
  if (o.pass) o.detail = "two runs of 4 repetitions identical outside T_seconds";
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  return o;
}

Outcome guarded(const std::function<Outcome()>& check) {
  try {
    return check();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  int failures = 0;
  auto report = [&](int n, const char* name, const Outcome& o) {
    std::cout << "criterion " << n << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  };

  report(1, "golden trace", guarded(golden_trace));
  report(2, "worked arguments", guarded(worked_arguments));
  PropertyRun props;
  try {
    props = property_suites();
  } catch (const std::exception& e) {
    props.termination = {false, std::string("exception: ") + e.what()};
    props.success = props.termination;
  }
  report(3, "termination and deadlock-freedom", props.termination);
  report(4, "success procedure", props.success);
  report(5, "similarity table", guarded(similarity_table));
  report(6, "single-shot baseline", guarded(ssr_baseline));
  report(7, "oracle equivalence", guarded(oracle_equivalence));
  report(8, "benchmark trend", guarded(benchmark_grid));
  report(9, "CLI determinism", guarded([&] { return cli_determinism(cli); }));
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
