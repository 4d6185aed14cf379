#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "drhai/argumentation.hpp"
#include "drhai/benchmark.hpp"
#include "drhai/dialogue.hpp"
#include "drhai/entailment.hpp"
#include "drhai/errors.hpp"
#include "drhai/formula.hpp"
#include "drhai/reconciliation.hpp"
#include "drhai/transcript.hpp"

namespace py = pybind11;
using namespace drhai;

namespace {

// Formulas cross the boundary as text.
std::vector<Formula> parse_all(const std::vector<std::string>& texts) {
  std::vector<Formula> out;
  std::size_t line = 0;
  for (const auto& t : texts) out.push_back(parse_formula(t, ++line));
  return out;
}

KnowledgeBase kb_of(const std::vector<std::string>& texts, const std::string& label) {
  KnowledgeBase kb(label);
  for (const auto& f : parse_all(texts)) {
    if (!kb.add(f)) throw PreconditionError("duplicate formula " + format_formula(f));
  }
  return kb;
}

std::vector<std::string> texts(const std::vector<Formula>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(format_formula(f));
  return out;
}

std::vector<std::string> texts(const KnowledgeBase& kb) { return texts(kb.formulas()); }

py::dict argument_dict(const Argument& a) {
  py::dict d;
  d["premises"] = texts(a.premises);
  d["claim"] = format_formula(a.claim);
  return d;
}

py::dict similarity_dict(const SimilarityReport& r) {
  py::dict d;
  d["syntactic"] = py::make_tuple(r.syntactic.num, r.syntactic.den);
  d["semantic"] = py::make_tuple(r.semantic.num, r.semantic.den);
  d["alpha"] = r.alpha;
  d["sigma"] = r.sigma;
  return d;
}

py::dict move_dict(const Move& m) {
  py::dict d;
  d["t"] = m.t;
  d["agent"] = std::string(to_string(m.agent));
  d["locution"] = std::string(to_string(m.locution));
  d["target"] = m.target ? py::object(py::str(format_formula(*m.target))) : py::object(py::none());
  d["argument"] = m.argument ? py::object(argument_dict(*m.argument)) : py::object(py::none());
  return d;
}

py::dict row_dict(const MetricsRow& r) {
  py::dict d;
  d["kb_size"] = r.kb_size;
  d["c"] = r.c;
  d["alpha"] = r.alpha;
  d["seed"] = r.seed;
  d["rep"] = r.rep;
  d["T_seconds"] = r.t_seconds;
  d["L"] = r.moves;
  d["N"] = r.updates;
  d["sigma_pre"] = r.sigma_pre;
  d["sigma_post_dr"] = r.sigma_post_dr;
  d["delta_sigma_dr"] = r.delta_sigma_dr;
  d["sigma_post_ssr"] = r.sigma_post_ssr;
  d["delta_sigma_ssr"] = r.delta_sigma_ssr;
  d["timeout"] = r.timeout;
  d["query"] = r.query;
  d["csv"] = csv_row(r);
  return d;
}

class Dialogue {
 public:
  explicit Dialogue(DialogueState s) : state_(std::move(s)) {}

  py::list moves() const {
    py::list out;
    for (const auto& m : state_.history()) out.append(move_dict(m));
    return out;
  }
  std::string transcript() const { return format_transcript(state_.history()); }
  std::string to_json() const { return dialogue_to_json(state_).dump(); }
  bool terminated() const { return state_.terminated(); }
  bool well_formed() const { return is_well_formed(state_); }
  std::vector<std::string> topic() const { return texts(queried_topic(state_)); }
  const DialogueState& state() const { return state_; }

 private:
  DialogueState state_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dialectical reconciliation engine";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", error.ptr());
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", error.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", error.ptr());

  m.def("normalize", [](const std::string& text) { return format_formula(parse_formula(text)); },
        "Parse a formula and print it in canonical form.");
  m.def("complement", [](const std::string& text) {
    return format_formula(complement(parse_formula(text)));
  });
  m.def("is_satisfiable", [](const std::vector<std::string>& kb) {
    return is_satisfiable(parse_all(kb));
  });
  m.def("entails", [](const std::vector<std::string>& kb, const std::string& claim) {
    return entails(parse_all(kb), parse_formula(claim));
  });
  m.def("enumerate_mus",
        [](const std::vector<std::string>& kb, const std::string& anchor, std::size_t limit) {
          const auto r = enumerate_mus(parse_all(kb), parse_formula(anchor), limit);
          return py::make_tuple(r.sets, r.complete);
        },
        py::arg("kb"), py::arg("anchor"), py::arg("limit") = 100);
  m.def("find_mcs", [](const std::vector<std::string>& hard, const std::vector<std::string>& soft) {
    return find_mcs(parse_all(hard), parse_all(soft));
  });

  m.def("arguments_for",
        [](const std::vector<std::string>& kb, const std::string& claim, std::size_t limit) {
          py::list out;
          for (const auto& a : arguments_for(parse_all(kb), parse_formula(claim), limit).arguments) {
            out.append(argument_dict(a));
          }
          return out;
        },
        py::arg("kb"), py::arg("claim"), py::arg("limit") = 10);
  m.def("counterarguments_for",
        [](const std::vector<std::string>& kb, const std::string& target, std::size_t limit) {
          py::list out;
          for (const auto& a : counterarguments_for(parse_all(kb), parse_formula(target), limit).arguments) {
            out.append(argument_dict(a));
          }
          return out;
        },
        py::arg("kb"), py::arg("target"), py::arg("limit") = 10);

  py::class_<Dialogue>(m, "Dialogue")
      .def_property_readonly("moves", &Dialogue::moves)
      .def_property_readonly("terminated", &Dialogue::terminated)
      .def_property_readonly("queried_topic", &Dialogue::topic)
      .def("transcript", &Dialogue::transcript)
      .def("to_json", &Dialogue::to_json)
      .def("is_well_formed", &Dialogue::well_formed)
      .def("__len__", [](const Dialogue& d) { return d.state().history().size(); });

  m.def("run_dialogue",
        [](const std::vector<std::string>& kb_r, const std::vector<std::string>& kb_e,
           const std::vector<std::string>& topic) {
          return Dialogue(run_dialogue(kb_of(kb_r, "KB_r"), kb_of(kb_e, "KB_e"), parse_all(topic)));
        },
        py::arg("kb_r"), py::arg("kb_e"), py::arg("topic"));

  m.def("success_procedure", [](const std::vector<std::string>& kb_e, const Dialogue& d) {
    const SuccessResult r = success_procedure(kb_of(kb_e, "KB_e"), d.state().store(Agent::Explainer),
                                              queried_topic(d.state()));
    py::list updates;
    for (const auto& u : r.updates) {
      py::dict e;
      e["argument"] = argument_dict(u.argument_applied);
      e["added"] = texts(u.added);
      e["retracted"] = texts(u.retracted);
      e["kb"] = texts(u.resulting_kb);
      updates.append(e);
    }
    py::dict out;
    out["kb"] = texts(r.kb);
    out["updates"] = updates;
    return out;
  });
  m.def("similarity",
        [](const std::vector<std::string>& kb_e, const std::vector<std::string>& kb_r, double alpha) {
          return similarity_dict(similarity(kb_of(kb_e, "KB_e"), kb_of(kb_r, "KB_r"), alpha));
        },
        py::arg("kb_e"), py::arg("kb_r"), py::arg("alpha") = 0.5);
  m.def("single_shot_explanation",
        [](const std::vector<std::string>& kb_r, const std::vector<std::string>& kb_e,
           const std::string& query) {
          const auto x = single_shot_explanation(kb_of(kb_r, "KB_r"), kb_of(kb_e, "KB_e"),
                                                 parse_formula(query));
          py::dict out;
          out["additions"] = texts(x.additions);
          out["removals"] = texts(x.removals);
          return out;
        });

  m.def("generate_pair",
        [](std::size_t kb_size, double c, std::uint64_t seed) {
          ExperimentConfig cfg;
          cfg.kb_size = kb_size;
          cfg.conflict_fraction = c;
          const KbPair p = derive_kb_pair(generate_inconsistent_kb(cfg, seed), c, mix_seed(seed, 1));
          py::dict out;
          out["kb_r"] = texts(p.kb_r);
          out["kb_e"] = texts(p.kb_e);
          out["removed"] = texts(p.removed);
          return out;
        },
        py::arg("kb_size"), py::arg("c"), py::arg("seed") = 1);
  m.def("run_experiment",
        [](std::size_t kb_size, double c, double alpha, std::uint64_t seed, std::size_t reps,
           double time_limit, std::size_t threads) {
          ExperimentConfig cfg;
          cfg.kb_size = kb_size;
          cfg.conflict_fraction = c;
          cfg.alpha = alpha;
          cfg.seed = seed;
          cfg.repetitions = reps;
          cfg.time_limit = time_limit;
          cfg.threads = threads;
          std::vector<MetricsRow> rows;
          {
            py::gil_scoped_release release;
            rows = run_experiment(cfg);
          }
          py::list out;
          for (const auto& r : rows) out.append(row_dict(r));
          return out;
        },
        py::arg("kb_size") = 200, py::arg("c") = 0.2, py::arg("alpha") = 0.5, py::arg("seed") = 1,
        py::arg("reps") = 1, py::arg("time_limit") = 500.0, py::arg("threads") = 0);
  m.def("csv_header", &csv_header);
}
