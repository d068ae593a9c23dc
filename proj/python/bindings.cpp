#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cbt/dsl.hpp"
#include "cbt/operators.hpp"
#include "cbt/oracle.hpp"
#include "cbt/scenarios.hpp"
#include "cbt/verify.hpp"

namespace py = pybind11;
using namespace cbt;

namespace {

py::dict to_dict(const NodeSpec& n) {
    py::dict d;
    d["id"] = n.id;
    d["kind"] = std::string(to_string(n.kind));
    if (is_leaf(n.kind)) d["name"] = n.leaf_ref;
    if (n.success_threshold) d["threshold"] = *n.success_threshold;
    if (n.base_priority) d["priority"] = *n.base_priority;
    py::list children;
    for (const auto& c : n.children) children.append(to_dict(c));
    d["children"] = children;
    return d;
}

std::string run(const std::string& scenario, std::optional<std::string> tree, std::optional<std::string> config,
                int max_ticks, int aging_increment, int hold_bonus) {
    const NodeSpec spec = tree ? dsl::parse(*tree) : sim::build_usecase_tree();
    const sim::ScenarioParams params = config ? sim::parse_params(*config) : sim::ScenarioParams{};
    EngineConfig cfg;
    cfg.max_ticks = max_ticks;
    cfg.policy = {aging_increment, hold_bonus};
    return to_jsonl(sim::run_scenario(spec, scenario, params, cfg));
}

std::string verify(const std::string& jsonl, const std::string& property, std::optional<int> bound) {
    const Trace trace = trace_from_jsonl(jsonl);
    VerdictReport report;
    if (property == "barrier" || property == "all") report.merge(verify_barrier(trace));
    if (property == "mutex" || property == "all") report.merge(verify_mutex(trace));
    if (property == "liveness" || property == "all") {
        report.merge(verify_liveness(trace, bound.value_or(starvation_bound(trace.tree, PolicyConfig{}))));
    }
    if (property != "barrier" && property != "mutex" && property != "liveness" && property != "all") {
        throw py::value_error("unknown property '" + property + "'");
    }
    return report.to_json();
}

py::tuple compose_parallel(const std::vector<double>& progress, const std::vector<std::vector<std::string>>& needs) {
    if (progress.size() != needs.size()) throw py::value_error("one resource list per progress value");
    ResourceCatalog catalog;
    std::vector<Progress> ps;
    std::vector<ResourceSet> qs;
    for (std::size_t i = 0; i < progress.size(); ++i) {
        ps.emplace_back(progress[i]);
        ResourceSet q;
        for (const auto& token : needs[i]) q.insert(catalog.intern(token));
        qs.push_back(q);
    }
    const auto c = ops::compose_parallel(ps, qs);
    return py::make_tuple(c.progress.value(), catalog.names(c.resources));
}

py::dict equivalence(std::uint64_t seed, int horizon) {
    const auto c = oracle::random_case(seed);
    const auto r = oracle::check_equivalence(c.tree, c.world, c.start_state, horizon);
    py::dict d;
    d["equal"] = r.equal;
    d["first_divergence"] = r.first_divergence;
    d["detail"] = r.detail;
    d["tree"] = dsl::serialize(c.tree);
    d["states"] = r.engine_states;
    return d;
}

}  // namespace

PYBIND11_MODULE(_cbt, m) {
    m.doc() = "Concurrent behavior tree runtime";

    // ParseError instances carry `line` and `column` attributes.
    static PyObject* parse_error = py::exception<dsl::ParseError>(m, "ParseError", PyExc_ValueError).release().ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const dsl::ParseError& e) {
            py::object err = py::handle(parse_error)(e.what());
            err.attr("line") = e.pos().line;
            err.attr("column") = e.pos().column;
            PyErr_SetObject(parse_error, err.ptr());
        }
    });
    py::register_exception<sim::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TraceFormatError>(m, "TraceFormatError", PyExc_ValueError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

    m.def("parse", [](const std::string& text) { return to_dict(dsl::parse(text)); }, py::arg("text"),
          "Parse tree text into nested dicts.");
    m.def("canonical", [](const std::string& text) { return dsl::serialize(dsl::parse(text)); }, py::arg("text"),
          "Canonical text of a tree.");
    m.def(
        "validate",
        [](const std::string& text) {
            std::vector<std::string> issues;
            for (const auto& i : validate_tree(dsl::parse(text)).issues) {
                issues.push_back(i.node_id + ": " + i.message);
            }
            return issues;
        },
        py::arg("text"));
    m.def("usecase_tree", [] { return dsl::serialize(sim::build_usecase_tree()); });
    m.def("scenarios", [] { return sim::scenario_names(); });

    m.def("run_scenario", &run, py::arg("scenario"), py::arg("tree") = py::none(), py::arg("config") = py::none(),
          py::arg("max_ticks") = 1000, py::arg("aging_increment") = 2, py::arg("hold_bonus") = 2,
          "Run a scenario and return its trace as JSON lines.");
    m.def("verify", &verify, py::arg("trace"), py::arg("property") = "all", py::arg("bound") = py::none(),
          "Check a JSON-lines trace; returns the verdict as JSON text.");

    m.def(
        "compose_progress_sequence",
        [](double first, double second, bool first_succeeded) {
            return ops::compose_progress_sequence(Progress(first), Progress(second), first_succeeded).value();
        },
        py::arg("first"), py::arg("second"), py::arg("first_succeeded"));
    m.def(
        "compose_progress_fallback",
        [](double first, double second, bool first_failed) {
            return ops::compose_progress_fallback(Progress(first), Progress(second), first_failed).value();
        },
        py::arg("first"), py::arg("second"), py::arg("first_failed"));
    m.def("compose_parallel", &compose_parallel, py::arg("progress"), py::arg("resources"));

    m.def(
        "effective_priority",
        [](int base, int wait, bool holding, int inc, int bonus) {
            return effective_priority(base, wait, holding, PolicyConfig{inc, bonus});
        },
        py::arg("base"), py::arg("wait_ticks"), py::arg("holding"), py::arg("aging_increment") = 2,
        py::arg("hold_bonus") = 2);
    m.def(
        "starvation_bound",
        [](int max_base, int own, int inc, int bonus) { return starvation_bound(max_base, own, PolicyConfig{inc, bonus}); },
        py::arg("max_base"), py::arg("own_base"), py::arg("aging_increment") = 2, py::arg("hold_bonus") = 2);

    m.def("oracle_equivalence", &equivalence, py::arg("seed"), py::arg("horizon") = 200,
          "Compare the tick engine with composed tables on a generated case.");
}
