#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hypersynth/analysis.hpp"
#include "hypersynth/errors.hpp"
#include "hypersynth/family.hpp"
#include "hypersynth/generators.hpp"
#include "hypersynth/stats.hpp"
#include "hypersynth/synthesis.hpp"
#include "hypersynth/textio.hpp"

namespace py = pybind11;
using namespace hypersynth;

namespace {

py::int_ to_py(const FamilySize& n) {
    std::ostringstream os;
    os << n;
    return py::int_(py::str(os.str()));
}

Mode mode_of(const std::string& name) {
    if (name == "feasibility") return Mode::Feasibility;
    if (name == "complete") return Mode::Complete;
    if (name == "optimal") return Mode::Optimal;
    throw py::value_error("unknown mode '" + name + "'");
}

SynthesisOptions options(const std::string& mode, bool hybrid, std::size_t max_iterations, double time_limit,
                         double tolerance, double cap) {
    SynthesisOptions o;
    o.mode = mode_of(mode);
    o.hybrid = hybrid;
    o.max_iterations = max_iterations;
    o.time_limit = time_limit;
    o.solver.tolerance = tolerance;
    o.enumeration_cap = cap;
    return o;
}

struct Result {
    SynthesisOutcome outcome;
    RunInfo info;
};

py::dict stats_of(const SynthesisStats& s) {
    py::dict d;
    d["iterations"] = s.iterations;
    d["decided_families"] = s.decided_families;
    d["family_size"] = to_py(s.family_size);
    d["decided_members"] = to_py(s.decided_members);
    d["average_decided_size"] = s.average_decided_size;
    d["explored_fraction"] = s.explored_fraction;
    d["wall_time"] = s.wall_time;
    d["ce_prunes"] = s.ce_prunes;
    return d;
}

py::dict check(const Problem& p, const std::vector<std::vector<ActionId>>& choices) {
    if (choices.size() != p.space.controllers()) throw py::value_error("wrong number of controllers");
    std::vector<Controller> ctl;
    for (const auto& c : choices) {
        if (c.size() != p.model.state_count()) throw py::value_error("controller length differs from state count");
        ctl.push_back(Controller{c});
    }
    py::dict d;
    d["structure"] = satisfies_structure(ctl, p.spec.controllers, p.spec.structure);
    std::vector<Mc> mcs;
    for (const auto& c : ctl) mcs.push_back(impose(p.model, c));
    const CheckResult r = check_mc(mcs, p.formula);
    py::list atoms;
    for (std::size_t i = 0; i < r.atoms.size(); ++i) {
        atoms.append(py::make_tuple(to_string(p.formula.atoms[i]), r.atoms[i].left, r.atoms[i].right, r.atoms[i].holds));
    }
    d["atoms"] = atoms;
    d["holds"] = r.holds && d["structure"].cast<bool>();
    return d;
}

}  // namespace

PYBIND11_MODULE(_hypersynth, m) {
    m.doc() = "Controller synthesis for probabilistic hyperproperties";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<CapExceededError>(m, "CapExceededError", PyExc_RuntimeError);

    py::class_<Mdp>(m, "Model")
        .def_property_readonly("state_count", &Mdp::state_count)
        .def_property_readonly("has_rewards", &Mdp::has_rewards)
        .def_property_readonly("labels", [](const Mdp& x) {
            std::vector<std::string> out;
            for (const auto& [name, _] : x.labels()) out.push_back(name);
            return out;
        })
        .def("actions", [](const Mdp& x, StateId s) {
            std::vector<std::string> out;
            for (const auto& c : x.actions(s)) out.push_back(c.name);
            return out;
        })
        .def("__eq__", [](const Mdp& a, const Mdp& b) { return a == b; })
        .def("__str__", &write_model);

    py::class_<HyperSpec>(m, "Spec")
        .def_readonly("controllers", &HyperSpec::controllers)
        .def("__str__", &write_spec);

    m.def("parse_model", [](const std::string& text) { return parse_model(text); });
    m.def("write_model", &write_model);
    m.def("parse_spec", [](const std::string& text) { return parse_spec(text); });
    m.def("write_spec", &write_spec);

    m.def("generator_ids", &generator_ids);
    m.def("generate",
          [](const std::string& id, const GeneratorParams& params, std::uint64_t seed) {
              Benchmark b = generate(id, params, seed);
              py::dict d;
              d["model"] = b.model;
              d["spec"] = b.spec;
              d["model_text"] = b.model_text;
              d["spec_text"] = b.spec_text;
              d["controller_text"] = b.controller_text;
              return d;
          },
          py::arg("id"), py::arg("params") = GeneratorParams{}, py::arg("seed") = 0);

    py::class_<Problem>(m, "Problem")
        .def(py::init(&Problem::make), py::arg("model"), py::arg("spec"), py::arg("memory_bits") = 0)
        .def_property_readonly("family_size", [](const Problem& p) { return to_py(p.space.size()); })
        .def_property_readonly("parameter_count", [](const Problem& p) { return p.space.parameter_count(); })
        .def_property_readonly("model", [](const Problem& p) { return p.model; })
        .def("check", &check, py::arg("controllers"));

    py::class_<Result>(m, "Outcome")
        .def_property_readonly("verdict", [](const Result& r) { return to_string(r.outcome.verdict); })
        .def_property_readonly("limit_exceeded", [](const Result& r) { return r.outcome.limit_exceeded; })
        .def_property_readonly("witness", [](const Result& r) -> std::optional<std::vector<ActionId>> {
            if (!r.outcome.witness) return std::nullopt;
            return r.outcome.witness->assignment;
        })
        .def_property_readonly("controllers", [](const Result& r) {
            std::vector<std::vector<ActionId>> out;
            for (const auto& c : r.outcome.controllers) out.push_back(c.choice);
            return out;
        })
        .def_property_readonly("satisfying_count", [](const Result& r) { return to_py(r.outcome.satisfying_count); })
        .def_property_readonly("best_value", [](const Result& r) { return r.outcome.best_value; })
        .def_property_readonly("stats", [](const Result& r) { return stats_of(r.outcome.stats); })
        .def("stats_json", [](const Result& r, const Problem& p) { return write_stats(p, r.outcome, r.info); });

    m.def("synthesize",
          [](const Problem& p, const std::string& mode, bool hybrid, std::size_t max_iterations, double time_limit,
             double tolerance) {
              const SynthesisOptions o = options(mode, hybrid, max_iterations, time_limit, tolerance, 1e6);
              py::gil_scoped_release release;
              return Result{ar_loop(p, o), RunInfo{"synth", hybrid ? "hybrid" : "ar", o.mode}};
          },
          py::arg("problem"), py::arg("mode") = "feasibility", py::arg("hybrid") = false,
          py::arg("max_iterations") = 0, py::arg("time_limit") = 0.0, py::arg("tolerance") = kDefaultTolerance);

    m.def("enumerate",
          [](const Problem& p, const std::string& mode, double cap, double tolerance) {
              const SynthesisOptions o = options(mode, false, 0, 0.0, tolerance, cap);
              py::gil_scoped_release release;
              return Result{enumerate_oracle(p, o), RunInfo{"enumerate", "oracle", o.mode}};
          },
          py::arg("problem"), py::arg("mode") = "feasibility", py::arg("cap") = 1e6,
          py::arg("tolerance") = kDefaultTolerance);
}
