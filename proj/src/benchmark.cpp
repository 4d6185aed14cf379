#include "drhai/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "drhai/dialogue.hpp"
#include "drhai/entailment.hpp"
#include "drhai/errors.hpp"
#include "drhai/reconciliation.hpp"

namespace drhai {

// ---------------------------------------------------------------------------
// Random numbers

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = -n % n;
  for (;;) {
    const std::uint64_t x = next();
    if (x >= limit) return x % n;
  }
}

bool Rng::chance(double p) { return static_cast<double>(next() >> 11) * 0x1.0p-53 < p; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0xd1b54a32d192ed03ULL);
  return splitmix(x);
}

void ExperimentConfig::validate() const {
  if (kb_size < 4) throw PreconditionError("kb_size must be at least 4");
  if (!(conflict_fraction > 0.0 && conflict_fraction <= 1.0)) {
    throw PreconditionError("conflict fraction must lie in (0, 1]");
  }
  if (alpha < 0.0 || alpha > 1.0) throw PreconditionError("alpha must lie in [0, 1]");
  if (atom_ratio <= 0.0) throw PreconditionError("atom ratio must be positive");
  if (max_premise_atoms < 1) throw PreconditionError("max premise atoms must be at least 1");
  if (time_limit <= 0.0) throw PreconditionError("time limit must be positive");
}

// ---------------------------------------------------------------------------
// Generation

namespace {

constexpr int kGenerationAttempts = 200;
constexpr double kUnitShare = 0.3;
constexpr double kViolationShare = 0.05;

Formula literal(const std::string& atom, bool positive) {
  Formula a = Formula::atom(atom);
  return positive ? a : Formula::negation(a);
}

std::optional<KnowledgeBase> try_generate(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n_atoms = std::max<std::size_t>(
      static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.kb_size) * cfg.atom_ratio)),
      cfg.max_premise_atoms + 1);
  std::vector<std::string> names;
  std::vector<bool> planted;
  for (std::size_t i = 0; i < n_atoms; ++i) {
    names.push_back("p" + std::to_string(i));
    planted.push_back(rng.chance(0.5));
  }

  const std::size_t n_violations = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::lround(kViolationShare * static_cast<double>(cfg.kb_size))));
  std::vector<std::size_t> slots(cfg.kb_size);
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  rng.shuffle(slots);
  std::set<std::size_t> violating(slots.begin(), slots.begin() + static_cast<long>(n_violations));

  KnowledgeBase kb("KB");
  std::vector<std::size_t> atom_order(n_atoms);
  for (std::size_t i = 0; i < n_atoms; ++i) atom_order[i] = i;
  std::size_t attempts = 0;
  while (kb.size() < cfg.kb_size) {
    if (++attempts > 50 * cfg.kb_size) return std::nullopt;
    const bool violate = violating.contains(kb.size());
    Formula f = Formula::atom("p0");
    if (rng.chance(kUnitShare)) {
      const std::size_t x = rng.below(n_atoms);
      f = literal(names[x], planted[x] != violate);
    } else {
      const std::size_t k = 1 + rng.below(cfg.max_premise_atoms);
      // Partial Fisher-Yates: k antecedent atoms plus one consequent atom.
      for (std::size_t i = 0; i <= k; ++i) std::swap(atom_order[i], atom_order[i + rng.below(n_atoms - i)]);
      bool antecedent_true = true;
      std::optional<Formula> body;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t x = atom_order[i];
        const bool positive = violate ? planted[x] : rng.chance(0.5);
        antecedent_true = antecedent_true && positive == planted[x];
        Formula lit = literal(names[x], positive);
        body = body ? Formula::conjunction(*body, lit) : lit;
      }
      const std::size_t y = atom_order[k];
      bool positive;
      if (violate) {
        positive = !planted[y];
      } else if (antecedent_true) {
        positive = planted[y];
      } else {
        positive = rng.chance(0.5);
      }
      f = Formula::implication(*body, literal(names[y], positive));
    }
    kb.add(f);
  }
  if (is_satisfiable(kb.formulas())) return std::nullopt;
  return kb;
}

}  // namespace

KnowledgeBase generate_inconsistent_kb(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  for (int attempt = 0; attempt < kGenerationAttempts; ++attempt) {
    if (auto kb = try_generate(config, mix_seed(seed, static_cast<std::uint64_t>(attempt)))) {
      return std::move(*kb);
    }
  }
  throw Error("could not generate an inconsistent knowledge base of size " +
              std::to_string(config.kb_size));
}

// ---------------------------------------------------------------------------
// Pairs and queries

namespace {

// Complement of a maximal satisfiable subset grown in random order: minimal
// under inclusion, not necessarily of minimum size.
IndexSet minimal_correction_set(const KnowledgeBase& kb, Rng& rng) {
  SolveContext ctx;
  const auto selectors = ctx.add_group(kb.formulas());
  std::vector<std::size_t> order(kb.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<bool> kept(kb.size(), false);
  std::vector<sat::Lit> assumptions;
  for (std::size_t i : order) {
    if (kept[i]) continue;
    assumptions.push_back(selectors[i]);
    if (!ctx.solve(assumptions)) {
      assumptions.back() = ~selectors[i];
      continue;
    }
    kept[i] = true;
    // Anything the model already satisfies can join for free.
    for (std::size_t j = 0; j < kb.size(); ++j) {
      if (!kept[j] && ctx.model_value(selectors[j])) {
        kept[j] = true;
        assumptions.push_back(selectors[j]);
      }
    }
  }
  IndexSet out;
  for (std::size_t i = 0; i < kb.size(); ++i) {
    if (!kept[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

KbPair derive_kb_pair(const KnowledgeBase& kb, double c, std::uint64_t seed) {
  if (!(c > 0.0 && c <= 1.0)) throw PreconditionError("conflict fraction must lie in (0, 1]");
  Rng rng(seed);
  const IndexSet mcs = minimal_correction_set(kb, rng);
  if (mcs.empty()) throw PreconditionError("derive_kb_pair: knowledge base is satisfiable");

  KbPair out{KnowledgeBase("KB_r"), KnowledgeBase("KB_e"), select(kb.formulas(), mcs), 0, 0};
  for (std::size_t i = 0, m = 0; i < kb.size(); ++i) {
    if (m < mcs.size() && mcs[m] == i) {
      ++m;
      continue;
    }
    out.kb_r.add(kb[i]);
  }

  const double n_r = static_cast<double>(out.kb_r.size());
  const auto conflict_target = static_cast<std::size_t>(std::lround(c * n_r));
  const auto copy_target = static_cast<std::size_t>(std::lround((1.0 - c) * n_r));

  SolveContext ctx;
  std::vector<sat::Lit> accepted;
  auto try_add = [&](const Formula& f) {
    if (out.kb_e.contains(f)) return false;
    const sat::Lit sel = ctx.add_guarded(f);
    accepted.push_back(sel);
    if (ctx.solve(accepted)) {
      out.kb_e.add(f);
      return true;
    }
    accepted.pop_back();
    ctx.add_clause({~sel});
    return false;
  };

  for (const auto& f : out.removed) {
    if (out.conflict_formulas >= conflict_target) break;
    if (try_add(f)) ++out.conflict_formulas;
  }
  std::vector<std::size_t> order(out.kb_r.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t i : order) {
    if (out.conflict_formulas >= conflict_target) break;
    const Formula neg = complement(out.kb_r[i]);
    if (out.kb_r.contains(neg)) continue;
    if (try_add(neg)) ++out.conflict_formulas;
  }
  rng.shuffle(order);
  for (std::size_t i : order) {
    if (out.copied_formulas >= copy_target) break;
    if (try_add(out.kb_r[i])) ++out.copied_formulas;
  }
  return out;
}

Formula select_query(const KnowledgeBase& kb_r, const KnowledgeBase& kb_e, std::uint64_t seed) {
  std::set<std::string> vocab = kb_r.atoms();
  const auto more = kb_e.atoms();
  vocab.insert(more.begin(), more.end());
  const LiteralSet e_r = entailed_literals(kb_r.formulas(), vocab);
  const LiteralSet e_e = entailed_literals(kb_e.formulas(), vocab);
  std::vector<Literal> candidates;
  for (const auto& l : e_r) {
    if (!e_e.contains(l)) candidates.push_back(l);
  }
  if (candidates.empty()) {
    throw PreconditionError("select_query: no literal is entailed by kb_r but not by kb_e");
  }
  Rng rng(seed);
  return candidates[rng.below(candidates.size())].to_formula();
}

// ---------------------------------------------------------------------------
// Experiments

MetricsRow run_repetition(const ExperimentConfig& config, std::size_t rep) {
  config.validate();
  MetricsRow row;
  row.kb_size = config.kb_size;
  row.c = config.conflict_fraction;
  row.alpha = config.alpha;
  row.seed = config.seed;
  row.rep = rep;

  const std::uint64_t rep_seed = mix_seed(config.seed, rep);
  const auto limit = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::duration<double>(config.time_limit));
  sat::Budget budget;
  budget.max_time = limit;
  budget.deadline = std::chrono::steady_clock::now() + limit;

  try {
    std::optional<KbPair> pair;
    std::optional<Formula> query;
    for (std::uint64_t attempt = 0; attempt < 20 && !query; ++attempt) {
      const std::uint64_t s = mix_seed(rep_seed, attempt);
      const KnowledgeBase kb = generate_inconsistent_kb(config, s);
      pair = derive_kb_pair(kb, config.conflict_fraction, mix_seed(s, 1));
      try {
        query = select_query(pair->kb_r, pair->kb_e, mix_seed(s, 2));
      } catch (const PreconditionError&) {
        // No usable query: regenerate.
      }
    }
    if (!query) throw Error("no knowledge-base pair with a usable query");
    row.query = format_formula(*query);

    DialogueOptions options;
    options.budget = budget;
    DialogueStats stats;
    const DialogueState d = run_dialogue(pair->kb_r, pair->kb_e, {*query}, {}, std::nullopt,
                                         options, &stats);
    row.t_seconds = stats.seconds;
    row.moves = d.history().size();

    row.sigma_pre = similarity(pair->kb_e, pair->kb_r, config.alpha, budget).sigma;
    const SuccessResult dr =
        success_procedure(pair->kb_e, d.store(Agent::Explainer), queried_topic(d), budget);
    row.updates = dr.updates.size();
    row.sigma_post_dr = similarity(dr.kb, pair->kb_r, config.alpha, budget).sigma;
    row.delta_sigma_dr = 100.0 * (row.sigma_post_dr - row.sigma_pre);

    const SingleShotExplanation x = single_shot_explanation(pair->kb_r, pair->kb_e, *query, budget);
    row.sigma_post_ssr =
        similarity(apply_explanation(pair->kb_e, x), pair->kb_r, config.alpha, budget).sigma;
    row.delta_sigma_ssr = 100.0 * (row.sigma_post_ssr - row.sigma_pre);
  } catch (const BudgetExceeded&) {
    row.timeout = true;
  }
  return row;
}

std::vector<MetricsRow> run_experiment(const ExperimentConfig& config,
                                       const std::function<void(const MetricsRow&)>& on_row) {
  config.validate();
  const std::size_t n = config.repetitions;
  std::vector<std::optional<MetricsRow>> done(n);
  std::size_t emitted = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t rep = next.fetch_add(1);
      if (rep >= n) return;
      try {
        MetricsRow row = run_repetition(config, rep);
        std::lock_guard lock(mu);
        done[rep] = std::move(row);
        while (emitted < n && done[emitted]) {
          if (on_row) on_row(*done[emitted]);
          ++emitted;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };

  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<MetricsRow> rows;
  for (auto& r : done) rows.push_back(std::move(*r));
  return rows;
}

std::string csv_header() {
  return "kb_size,c,alpha,seed,rep,T_seconds,L,N,sigma_pre,sigma_post_dr,delta_sigma_dr,"
         "sigma_post_ssr,delta_sigma_ssr,timeout_flag";
}

std::string csv_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%zu,%g,%g,%llu,%zu,%.6f,%zu,%zu,%.6f,%.6f,%.4f,%.6f,%.4f,%d", r.kb_size, r.c,
                r.alpha, static_cast<unsigned long long>(r.seed), r.rep, r.t_seconds, r.moves,
                r.updates, r.sigma_pre, r.sigma_post_dr, r.delta_sigma_dr, r.sigma_post_ssr,
                r.delta_sigma_ssr, r.timeout ? 1 : 0);
  return buf;
}

}  // namespace drhai
