#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shiq/engine.hpp"
#include "shiq/errors.hpp"
#include "shiq/frontend.hpp"
#include "shiq/model.hpp"
#include "shiq/reduction.hpp"

namespace py = pybind11;
using namespace shiq;

namespace {

py::dict to_dict(const Interpretation& i) {
  py::dict concepts;
  for (const auto& [name, ext] : i.concepts) concepts[py::str(name)] = py::cast(ext);
  py::dict roles;
  for (const auto& [name, ext] : i.roles) roles[py::str(name)] = py::cast(ext);
  py::dict out;
  out["domain"] = i.domain_size;
  out["concepts"] = concepts;
  out["roles"] = roles;
  out["individuals"] = py::cast(i.individuals);
  return out;
}

struct Outcome {
  bool positive = false;
  std::string verdict;
  SolveResult result;

  py::object model() const {
    if (!result.forest) return py::none();
    try {
      return to_dict(extract_model(*result.forest));
    } catch (const UnsupportedError&) {
      return py::none();
    }
  }

  py::object dot() const {
    if (!result.forest) return py::none();
    return py::str(to_dot(*result.forest));
  }

  py::dict stats() const {
    py::dict d;
    d["steps"] = result.stats.steps;
    d["choice_points"] = result.stats.choice_points;
    d["backtracks"] = result.stats.backtracks;
    d["nodes"] = result.stats.max_nodes;
    d["max_path_length"] = result.stats.max_path_length;
    d["max_out_degree"] = result.stats.max_out_degree;
    return d;
  }
};

SolveResult run(const ReducedProblem& p, std::size_t max_nodes, std::optional<std::uint64_t> seed) {
  SolveOptions opts;
  opts.max_nodes = max_nodes;
  opts.seed = seed;
  py::gil_scoped_release release;
  return solve(p, opts);
}

Outcome consistent(const KnowledgeBase& kb, std::size_t max_nodes, std::optional<std::uint64_t> seed) {
  Outcome o;
  o.result = run(reduce_abox_consistency(kb), max_nodes, seed);
  o.positive = o.result.consistent;
  o.verdict = o.positive ? "CONSISTENT" : "INCONSISTENT";
  return o;
}

Outcome satisfiable(const KnowledgeBase& kb, const std::string& text, std::size_t max_nodes,
                    std::optional<std::uint64_t> seed) {
  const Concept c = parse_concept(text);
  const ReducedProblem p = reduce_concept_sat(c, kb);
  check_simple_roles(c, p.rbox);
  Outcome o;
  o.result = run(p, max_nodes, seed);
  o.positive = o.result.consistent;
  o.verdict = o.positive ? "SAT" : "UNSAT";
  return o;
}

Outcome subsumes(const KnowledgeBase& kb, const std::string& sub, const std::string& super,
                 std::size_t max_nodes, std::optional<std::uint64_t> seed) {
  const Concept c = parse_concept(sub);
  const Concept d = parse_concept(super);
  const ReducedProblem p = reduce_subsumption(c, d, kb);
  check_simple_roles(c, p.rbox);
  check_simple_roles(d, p.rbox);
  Outcome o;
  o.result = run(p, max_nodes, seed);
  o.positive = !o.result.consistent;
  o.verdict = o.positive ? "YES" : "NO";
  return o;
}

}  // namespace

PYBIND11_MODULE(_shiq, m) {
  m.doc() = "SHIQ tableau reasoner";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<SignatureError>(m, "SignatureError", base);
  py::register_exception<BudgetError>(m, "BudgetError", base);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base);

  py::class_<KnowledgeBase>(m, "KnowledgeBase")
      .def("individuals", &KnowledgeBase::individuals)
      .def("__str__", [](const KnowledgeBase& kb) { return print_kb(kb); })
      .def("__eq__", [](const KnowledgeBase& a, const KnowledgeBase& b) { return a == b; });

  py::class_<Outcome>(m, "Outcome")
      .def_readonly("positive", &Outcome::positive)
      .def_readonly("verdict", &Outcome::verdict)
      .def_property_readonly("stats", &Outcome::stats)
      .def("model", &Outcome::model, "Extracted model when the final forest has no blocked nodes.")
      .def("dot", &Outcome::dot)
      .def("__bool__", [](const Outcome& o) { return o.positive; })
      .def("__repr__", [](const Outcome& o) { return "<Outcome " + o.verdict + ">"; });

  m.def("parse_kb", &parse_kb, py::arg("text"));
  m.def("normalize", [](const std::string& text) { return to_string(nnf(parse_concept(text))); },
        py::arg("concept"), "Negation normal form of a concept, printed.");
  m.def("consistent", &consistent, py::arg("kb"), py::kw_only(), py::arg("max_nodes") = 100000,
        py::arg("seed") = py::none());
  m.def("satisfiable", &satisfiable, py::arg("kb"), py::arg("concept"), py::kw_only(),
        py::arg("max_nodes") = 100000, py::arg("seed") = py::none());
  m.def("subsumes", &subsumes, py::arg("kb"), py::arg("sub"), py::arg("super"), py::kw_only(),
        py::arg("max_nodes") = 100000, py::arg("seed") = py::none());
  m.def(
      "find_model",
      [](const KnowledgeBase& kb, std::size_t max_domain) -> py::object {
        std::optional<Interpretation> i;
        {
          py::gil_scoped_release release;
          i = find_model_bruteforce(kb, {.max_domain = max_domain});
        }
        if (!i) return py::none();
        return to_dict(*i);
      },
      py::arg("kb"), py::arg("max_domain") = 4, "Exhaustive search for a model on small domains.");
}
