#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "pnmc/engines.hpp"
#include "pnmc/errors.hpp"
#include "pnmc/gadgets.hpp"
#include "pnmc/logic.hpp"
#include "pnmc/net.hpp"
#include "pnmc/presburger.hpp"
#include "pnmc/statespace.hpp"

namespace py = pybind11;
using namespace pnmc;

namespace {

const char* verdict_word(CheckVerdict::Kind k) {
  switch (k) {
    case CheckVerdict::Kind::Holds: return "holds";
    case CheckVerdict::Kind::Fails: return "fails";
    case CheckVerdict::Kind::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const char* boundedness_word(BoundednessResult::Kind k) {
  switch (k) {
    case BoundednessResult::Kind::Bounded: return "bounded";
    case BoundednessResult::Kind::Unbounded: return "unbounded";
    case BoundednessResult::Kind::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CheckVerdict check_text(const PetriNet& net, const std::string& formula, const std::string& structure,
                        const std::string& mode, const std::optional<Marking>& at, std::size_t cap,
                        const std::optional<std::string>& reach, const std::optional<std::string>& star,
                        const std::optional<std::string>& engine) {
  if (structure != "urg" && structure != "ug") throw PreconditionError("structure must be 'urg' or 'ug'");
  if (mode != "check" && mode != "validity") throw PreconditionError("mode must be 'check' or 'validity'");
  CheckRequest req;
  req.formula = parse_any(formula);
  req.structure = structure == "ug" ? Structure::Ug : Structure::Urg;
  req.mode = mode == "validity" ? CheckMode::Validity : CheckMode::ModelCheck;
  req.at = at;
  req.options.cap = cap;
  if (reach) req.side.reach = parse_presburger(*reach);
  if (star) req.side.star = parse_presburger(*star);
  return engine ? run_engine(*engine, net, req) : check(net, req);
}

py::dict classify_text(const std::string& text) {
  AnyFormula f = parse_any(text);
  FragmentReport r = f.is_fo() ? classify(f.fo) : classify(f.ml);
  py::list preds;
  for (auto p : r.predicates_used) preds.append(predicate_symbol(p));
  py::dict d;
  d["kind"] = f.is_fo() ? "fo" : "ml";
  d["variable_count"] = r.variable_count;
  d["predicates"] = preds;
  d["existential"] = r.is_existential;
  d["positive"] = r.is_positive;
  d["forward"] = r.is_forward;
  d["modal_degree"] = r.modal_degree ? py::cast(*r.modal_degree) : py::none();
  d["has_inverse"] = r.has_inverse;
  d["has_paml"] = r.has_paml;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pnmc, m) {
  m.doc() = "Petri net reachability-graph model checking";

  auto base = py::register_exception<Error>(m, "PnmcError");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SemanticError>(m, "SemanticError", base.ptr());
  py::register_exception<FragmentError>(m, "FragmentError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ResourceExceeded>(m, "ResourceExceeded", base.ptr());

  py::class_<PetriNet>(m, "Net")
      .def_static("parse", &parse_net, py::arg("text"))
      .def("serialize", &serialize)
      .def_property_readonly("name", &PetriNet::name)
      .def_property_readonly("places", &PetriNet::places)
      .def_property_readonly("transitions", &PetriNet::transitions)
      .def_property_readonly("initial", &PetriNet::initial)
      .def("enabled",
           [](const PetriNet& n, const Marking& mk, const std::string& t) { return enabled(n, mk, std::string_view(t)); })
      .def("fire", [](const PetriNet& n, const Marking& mk, const std::string& t) { return fire(n, mk, std::string_view(t)); })
      .def("successors", [](const PetriNet& n, const Marking& mk) { return successors(n, mk); })
      .def("predecessors", [](const PetriNet& n, const Marking& mk) { return predecessors(n, mk); })
      .def("__eq__", [](const PetriNet& a, const PetriNet& b) { return a == b; })
      .def("__repr__", [](const PetriNet& n) {
        return "<Net " + n.name() + ": " + std::to_string(n.num_places()) + " places, " +
               std::to_string(n.num_transitions()) + " transitions>";
      });

  py::class_<ReachGraph>(m, "Graph")
      .def_readonly("nodes", &ReachGraph::nodes)
      .def_readonly("edges", &ReachGraph::edges)
      .def_readonly("initial", &ReachGraph::initial)
      .def_readonly("complete", &ReachGraph::complete)
      .def("__len__", &ReachGraph::size)
      .def("find", &ReachGraph::find, py::arg("marking"))
      .def("path_to", &ReachGraph::path_to, py::arg("node"), py::arg("net"));

  m.def("explore", [](const PetriNet& n, std::size_t cap) { return explore(n, cap); }, py::arg("net"),
        py::arg("cap") = kDefaultCap);
  m.def("to_dot", &to_dot, py::arg("graph"), py::arg("net"));
  m.def(
      "is_bounded",
      [](const PetriNet& n, std::size_t budget) {
        auto r = is_bounded(n, budget);
        return py::make_tuple(boundedness_word(r.kind),
                              r.kind == BoundednessResult::Kind::Bounded ? py::cast(r.reach_size) : py::none());
      },
      py::arg("net"), py::arg("budget") = kDefaultCap, "('bounded'|'unbounded'|'inconclusive', reach size or None)");

  py::class_<CheckVerdict>(m, "Verdict")
      .def_property_readonly("kind", [](const CheckVerdict& v) { return verdict_word(v.kind); })
      .def_readonly("engine", &CheckVerdict::engine)
      .def_readonly("reason", &CheckVerdict::reason)
      .def_readonly("witness", &CheckVerdict::witness)
      .def_property_readonly("definitive", &CheckVerdict::definitive)
      .def_property_readonly("exit_code", [](const CheckVerdict& v) { return exit_code(v); })
      .def("line", &CheckVerdict::line)
      .def("__bool__", &CheckVerdict::is_holds)
      .def("__repr__", [](const CheckVerdict& v) { return "<Verdict " + v.line() + ">"; });

  m.def("check", &check_text, py::arg("net"), py::arg("formula"), py::arg("structure") = "urg",
        py::arg("mode") = "check", py::arg("at") = std::nullopt, py::arg("cap") = kDefaultCap,
        py::arg("reach") = std::nullopt, py::arg("star") = std::nullopt, py::arg("engine") = std::nullopt,
        "Check a formula given as text; routes to a decision procedure unless `engine` is set.");
  m.def(
      "route",
      [](const PetriNet& n, const std::string& formula, const std::string& structure, const std::string& mode) {
        CheckRequest req;
        req.formula = parse_any(formula);
        req.structure = structure == "ug" ? Structure::Ug : Structure::Urg;
        req.mode = mode == "validity" ? CheckMode::Validity : CheckMode::ModelCheck;
        auto r = route(n, req);
        return py::make_tuple(r.engine.empty() ? py::none() : py::cast(r.engine), r.justification);
      },
      py::arg("net"), py::arg("formula"), py::arg("structure") = "urg", py::arg("mode") = "check");
  m.def("engine_names", &engine_names);

  m.def("classify", &classify_text, py::arg("formula"));
  m.def("normalize_formula", [](const std::string& text) {
    AnyFormula f = parse_any(text);
    return f.is_fo() ? to_string(f.fo) : to_string(f.ml);
  });
  m.def("fixed_formulas", [] {
    py::dict d;
    for (const auto& f : fixed_formulas()) d[py::str(f.name)] = f.formula.is_fo() ? to_string(f.formula.fo) : to_string(f.formula.ml);
    return d;
  });

  m.def("presburger_decide", [](const std::string& text) { return decide(parse_presburger(text)); }, py::arg("sentence"));
  m.def("presburger_eliminate", [](const std::string& text) { return to_string(eliminate(parse_presburger(text))); },
        py::arg("formula"));

  m.def("qbf_truth", [](const std::string& text) { return qbf_truth(parse_qbf(text)); }, py::arg("qbf"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in process; returns (exit code, stdout, stderr).");
}
