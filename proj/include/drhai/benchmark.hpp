#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "drhai/formula.hpp"

namespace drhai {

/// Small deterministic generator: splitmix64 seeding into a xoshiro256**
/// stream, with its own bounded draws so results do not depend on the
/// standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// True with probability p.
  bool chance(double p);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t s_[4];
};

/// splitmix64 finaliser; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

struct ExperimentConfig {
  std::size_t kb_size = 200;
  double conflict_fraction = 0.2;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  double atom_ratio = 0.25;
  std::size_t max_premise_atoms = 3;
  double time_limit = 500.0;  // seconds per repetition
  std::size_t repetitions = 1;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// Unit literals and implications (conjunction of literals -> literal) over
/// ceil(kb_size * atom_ratio) atoms named p0, p1, ... . Most formulas agree
/// with a hidden assignment; a few deliberately contradict it. Unsatisfiable
/// by construction check; retries with derived seeds.
KnowledgeBase generate_inconsistent_kb(const ExperimentConfig& config, std::uint64_t seed);

struct KbPair {
  KnowledgeBase kb_r;
  KnowledgeBase kb_e;
  std::vector<Formula> removed;  // the correction set taken out of the input
  std::size_t conflict_formulas = 0;
  std::size_t copied_formulas = 0;
};

/// kb_r = kb minus a minimum correction set. kb_e starts with correction-set
/// formulas and negated kb_r formulas up to c * |kb_r|, then takes up to
/// (1 - c) * |kb_r| kb_r formulas, each only while kb_e stays satisfiable.
KbPair derive_kb_pair(const KnowledgeBase& inconsistent_kb, double c, std::uint64_t seed);

/// Seeded choice among literals entailed by kb_r but not by kb_e over the
/// joint vocabulary. Throws PreconditionError when there is none.
Formula select_query(const KnowledgeBase& kb_r, const KnowledgeBase& kb_e, std::uint64_t seed);

struct MetricsRow {
  std::size_t kb_size = 0;
  double c = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::size_t rep = 0;
  double t_seconds = 0.0;
  std::size_t moves = 0;    // L
  std::size_t updates = 0;  // N
  double sigma_pre = 0.0;
  double sigma_post_dr = 0.0;
  double delta_sigma_dr = 0.0;  // percentage points
  double sigma_post_ssr = 0.0;
  double delta_sigma_ssr = 0.0;
  bool timeout = false;
  std::string query;
};

/// One repetition; never throws on a timeout (the row is flagged instead).
MetricsRow run_repetition(const ExperimentConfig& config, std::size_t rep);

/// All repetitions, run in parallel; `on_row` sees rows in repetition order.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& config,
                                       const std::function<void(const MetricsRow&)>& on_row = {});

std::string csv_header();
std::string csv_row(const MetricsRow& r);

}  // namespace drhai
