#include <doctest.h>

#include <random>

#include "drhai/errors.hpp"
#include "drhai/sat.hpp"

using drhai::sat::Lit;
using drhai::sat::Solver;
using drhai::sat::Status;

namespace {

using Cnf = std::vector<std::vector<Lit>>;

Cnf random_3cnf(std::mt19937_64& rng, int vars, int clauses) {
  std::uniform_int_distribution<int> var(0, vars - 1);
  std::bernoulli_distribution sign(0.5);
  Cnf cnf;
  for (int i = 0; i < clauses; ++i) {
    std::vector<Lit> c;
    for (int k = 0; k < 3; ++k) c.push_back(Lit::make(var(rng), sign(rng)));
    cnf.push_back(c);
  }
  return cnf;
}

bool brute_force(const Cnf& cnf, int vars, const std::vector<Lit>& assumptions) {
  for (std::uint32_t m = 0; m < (1u << vars); ++m) {
    auto val = [m](Lit l) { return ((m >> l.var()) & 1u) != l.negative(); };
    bool ok = std::all_of(assumptions.begin(), assumptions.end(), val);
    for (const auto& c : cnf) {
      if (!ok) break;
      ok = std::any_of(c.begin(), c.end(), val);
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("sat") {
  TEST_CASE("agrees with brute force on random 3-CNF near the threshold") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 400; ++trial) {
      const int vars = 12;
      Cnf cnf = random_3cnf(rng, vars, 40 + trial % 25);
      Solver s;
      for (int v = 0; v < vars; ++v) s.new_var();
      for (auto c : cnf) s.add_clause(c);
      std::vector<Lit> as;
      if (trial % 2) as = {Lit::make(trial % vars, trial % 3 == 0), Lit::make((trial + 5) % vars)};
      const bool expected = brute_force(cnf, vars, as);
      const Status st = s.solve(as);
      REQUIRE((st == Status::Sat) == expected);
      if (st == Status::Sat) {
        for (const auto& c : cnf) {
          CHECK(std::any_of(c.begin(), c.end(), [&](Lit l) { return s.model_value(l); }));
        }
        for (Lit a : as) CHECK(s.model_value(a));
      } else if (!as.empty() && s.okay()) {
        // The reported failed assumptions must be contradictory on their own.
        CHECK(!brute_force(cnf, vars, s.failed_assumptions()));
        for (Lit f : s.failed_assumptions()) {
          CHECK(std::find(as.begin(), as.end(), f) != as.end());
        }
      }
    }
  }

  TEST_CASE("incremental solving reuses the solver") {
    Solver s;
    for (int v = 0; v < 3; ++v) s.new_var();
    s.add_clause({Lit::make(0, true), Lit::make(1)});
    s.add_clause({Lit::make(1, true), Lit::make(2)});
    const Lit a0[] = {Lit::make(0), Lit::make(2, true)};
    CHECK(s.solve(a0) == Status::Unsat);
    CHECK(s.failed_assumptions().size() == 2);
    CHECK(s.solve() == Status::Sat);
    const Lit a1[] = {Lit::make(0)};
    REQUIRE(s.solve(a1) == Status::Sat);
    CHECK(s.model_value(2));
  }

  TEST_CASE("determinism") {
    std::mt19937_64 rng(9);
    Cnf cnf = random_3cnf(rng, 60, 250);
    auto run = [&] {
      Solver s;
      for (int v = 0; v < 60; ++v) s.new_var();
      for (auto c : cnf) s.add_clause(c);
      std::vector<bool> model;
      if (s.solve() == Status::Sat) {
        for (int v = 0; v < 60; ++v) model.push_back(s.model_value(v));
      }
      return model;
    };
    CHECK(run() == run());
  }

  TEST_CASE("budget exhaustion is reported, not answered") {
    // Pigeonhole 9 into 8 is hard for plain resolution.
    const int pigeons = 9, holes = 8;
    Solver s;
    auto var = [&](int p, int h) { return p * holes + h; };
    for (int i = 0; i < pigeons * holes; ++i) s.new_var();
    for (int p = 0; p < pigeons; ++p) {
      std::vector<Lit> c;
      for (int h = 0; h < holes; ++h) c.push_back(Lit::make(var(p, h)));
      s.add_clause(c);
    }
    for (int h = 0; h < holes; ++h) {
      for (int p = 0; p < pigeons; ++p) {
        for (int q = p + 1; q < pigeons; ++q) {
          s.add_clause({Lit::make(var(p, h), true), Lit::make(var(q, h), true)});
        }
      }
    }
    drhai::sat::Budget b;
    b.max_conflicts = 100;
    s.set_budget(b);
    CHECK_THROWS_AS(s.solve(), drhai::BudgetExceeded);
    // Still usable afterwards.
    CHECK_THROWS_AS(s.solve(), drhai::BudgetExceeded);
  }
}
