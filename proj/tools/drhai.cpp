#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "drhai/benchmark.hpp"
#include "drhai/dialogue.hpp"
#include "drhai/errors.hpp"
#include "drhai/formula.hpp"
#include "drhai/reconciliation.hpp"
#include "drhai/service.hpp"
#include "drhai/transcript.hpp"

using namespace drhai;

namespace {

std::vector<Formula> parse_topic(const std::string& text) {
  std::vector<Formula> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    if (part.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_formula(part));
  }
  if (out.empty()) throw PreconditionError("topic is empty");
  return out;
}

void print_similarity(std::ostream& out, const char* name, const SimilarityReport& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", r.sigma);
  out << name << ": sigma " << buf << " (syntactic " << format_ratio(r.syntactic) << ", semantic "
      << format_ratio(r.semantic) << ")\n";
}

void print_formulas(std::ostream& out, const char* name, const std::vector<Formula>& fs) {
  out << name << ":";
  if (fs.empty()) out << " (none)";
  for (std::size_t i = 0; i < fs.size(); ++i) out << (i ? ", " : " ") << format_formula(fs[i]);
  out << "\n";
}

int run_bench(const ExperimentConfig& cfg, const std::string& out_path) {
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw Error("cannot open " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << csv_header() << "\n" << std::flush;
  std::size_t timeouts = 0;
  run_experiment(cfg, [&](const MetricsRow& row) {
    out << csv_row(row) << "\n" << std::flush;
    timeouts += row.timeout ? 1 : 0;
  });
  if (timeouts) std::cerr << timeouts << " repetition(s) hit the time limit\n";
  return 0;
}

int run_dialogue_cmd(const std::string& kb_r_path, const std::string& kb_e_path,
                     const std::string& topic_text, const std::string& trace_path,
                     const std::string& json_path, double alpha) {
  const KnowledgeBase kb_r = load_kb_file(kb_r_path, "KB_r");
  const KnowledgeBase kb_e = load_kb_file(kb_e_path, "KB_e");
  const auto topic = parse_topic(topic_text);
  DialogueStats stats;
  const DialogueState d = run_dialogue(kb_r, kb_e, topic, {}, std::nullopt, {}, &stats);
  const std::string transcript = format_transcript(d.history());
  std::cout << transcript;
  if (!trace_path.empty()) {
    std::ofstream f(trace_path);
    f << transcript;
    if (!f) throw Error("cannot write " + trace_path);
  }
  if (!json_path.empty()) {
    std::ofstream f(json_path);
    f << dialogue_to_json(d).dump(2) << "\n";
    if (!f) throw Error("cannot write " + json_path);
  }
  const SuccessResult r = success_procedure(kb_e, d.store(Agent::Explainer), queried_topic(d));
  std::cout << "\n";
  for (const auto& u : r.updates) {
    std::cout << "update " << format_argument(u.argument_applied) << "\n";
    print_formulas(std::cout, "  retracted", u.retracted);
  }
  print_similarity(std::cout, "before", similarity(kb_e, kb_r, alpha));
  print_similarity(std::cout, "after", similarity(r.kb, kb_r, alpha));
  return 0;
}

int run_ssr(const std::string& kb_r_path, const std::string& kb_e_path, const std::string& query,
            double alpha) {
  const KnowledgeBase kb_r = load_kb_file(kb_r_path, "KB_r");
  const KnowledgeBase kb_e = load_kb_file(kb_e_path, "KB_e");
  const SingleShotExplanation x = single_shot_explanation(kb_r, kb_e, parse_formula(query));
  print_formulas(std::cout, "additions", x.additions);
  print_formulas(std::cout, "removals", x.removals);
  print_similarity(std::cout, "before", similarity(kb_e, kb_r, alpha));
  print_similarity(std::cout, "after", similarity(apply_explanation(kb_e, x), kb_r, alpha));
  return 0;
}

int run_serve(const std::string& host, int port, const std::vector<std::string>& scenario_files,
              const std::string& store, std::size_t menu_size, int budget_ms) {
  ServiceOptions opts;
  opts.menu_size = menu_size;
  opts.explainer_budget = std::chrono::milliseconds(budget_ms);
  opts.store_path = store;
  DialogueService service(opts);
  for (const auto& path : scenario_files) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    Scenario s = scenario_from_json(nlohmann::json::parse(in));
    bool known = false;
    for (const auto& existing : service.scenarios()) known = known || existing.id == s.id;
    if (!known) std::cerr << "scenario " << service.add_scenario(std::move(s)) << " from " << path << "\n";
  }
  HttpServer server(service);
  const int bound = server.bind(host, port);
  std::cerr << "listening on http://" << host << ":" << bound << "\n";
  server.listen();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dialectical reconciliation between an explainer and an explainee"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string out_path;
  auto* bench = app.add_subcommand("bench", "Run the randomized benchmark and write CSV rows");
  bench->add_option("--kb-size", cfg.kb_size, "Formulas in the generated inconsistent KB");
  bench->add_option("--conflict-fraction,-c", cfg.conflict_fraction, "Conflict fraction c in (0, 1]");
  bench->add_option("--alpha", cfg.alpha, "Weight of the syntactic similarity component");
  bench->add_option("--seed", cfg.seed, "Base seed");
  bench->add_option("--reps", cfg.repetitions, "Repetitions");
  bench->add_option("--time-limit", cfg.time_limit, "Seconds per repetition");
  bench->add_option("--atom-ratio", cfg.atom_ratio, "Atoms per formula");
  bench->add_option("--max-premise-atoms", cfg.max_premise_atoms, "Literals per antecedent");
  bench->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");
  bench->add_option("--out", out_path, "CSV file (default: stdout)");

  std::string kb_r_path, kb_e_path, topic, trace_path, json_path, query;
  double alpha = 0.5;
  auto* dialogue = app.add_subcommand("dialogue", "Run an automated dialogue between two KB files");
  dialogue->add_option("--kb-r", kb_r_path, "Explainer KB file")->required()->check(CLI::ExistingFile);
  dialogue->add_option("--kb-e", kb_e_path, "Explainee KB file")->required()->check(CLI::ExistingFile);
  dialogue->add_option("--topic", topic, "Topic formulas separated by ';'")->required();
  dialogue->add_option("--trace", trace_path, "Write the transcript here");
  dialogue->add_option("--json", json_path, "Write the structured export here");
  dialogue->add_option("--alpha", alpha, "Similarity weight");

  auto* ssr = app.add_subcommand("explain-ssr", "Single-shot reconciliation baseline");
  ssr->add_option("--kb-r", kb_r_path, "Explainer KB file")->required()->check(CLI::ExistingFile);
  ssr->add_option("--kb-e", kb_e_path, "Explainee KB file")->required()->check(CLI::ExistingFile);
  ssr->add_option("--query", query, "Formula to explain")->required();
  ssr->add_option("--alpha", alpha, "Similarity weight");

  std::string host = "127.0.0.1", store;
  int port = 8080, budget_ms = 2000;
  std::size_t menu_size = 6;
  std::vector<std::string> scenario_files;
  auto* serve = app.add_subcommand("serve", "Serve the dialogue HTTP API");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--scenario", scenario_files, "Scenario JSON files to load")->check(CLI::ExistingFile);
  serve->add_option("--store", store, "Append-only event log for persistence");
  serve->add_option("--menu-size", menu_size, "Moves offered per turn besides agree-to-disagree");
  serve->add_option("--explainer-budget-ms", budget_ms, "Explainer solver budget per call");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) return run_bench(cfg, out_path);
    if (*dialogue) return run_dialogue_cmd(kb_r_path, kb_e_path, topic, trace_path, json_path, alpha);
    if (*ssr) return run_ssr(kb_r_path, kb_e_path, query, alpha);
    if (*serve) return run_serve(host, port, scenario_files, store, menu_size, budget_ms);
  } catch (const ParseError& e) {
    std::cerr << "error: line " << e.line() << ", column " << e.column() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
