// cbt: parse trees, run the use-case scenarios, check traces.
//
//   cbt run TREE SCENARIO [--config F] [--ticks N] [--trace PATH]
//   cbt check TRACE --property barrier|mutex|liveness|all [--bound K]
//   cbt parse FILE
//   cbt demo hallway|office
//
// Exit codes: 0 ok, 1 a property failed, 2 usage / parse / binding error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cbt/dsl.hpp"
#include "cbt/scenarios.hpp"
#include "cbt/verify.hpp"

namespace fs = std::filesystem;
using namespace cbt;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

NodeSpec load_tree(const std::string& path) {
    const std::string text = slurp(path);
    try {
        return dsl::parse(text);
    } catch (const dsl::ParseError& e) {
        throw UsageError(path + ":" + e.what());
    }
}

std::string leaf_name(const TreeIndex& index, const std::string& id) {
    const auto* e = index.find(id);
    if (e && is_leaf(e->node->kind)) return e->node->leaf_ref;
    return id;
}

VerdictReport check_all(const Trace& trace, const std::string& property, int bound) {
    VerdictReport report;
    if (property == "barrier" || property == "all") report.merge(verify_barrier(trace));
    if (property == "mutex" || property == "all") report.merge(verify_mutex(trace));
    if (property == "liveness" || property == "all") report.merge(verify_liveness(trace, bound));
    return report;
}

void write_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << to_jsonl(trace);
}

std::string result_line(const Trace& trace) {
    return "result: " + std::string(to_string(*trace.result)) + " after " + std::to_string(trace.ticks) + " ticks";
}

struct RunArgs {
    std::string tree;
    std::string scenario;
    std::string config;
    std::string trace;
    int ticks = 1000;
    PolicyConfig policy;
};

int cmd_run(const RunArgs& a) {
    const NodeSpec tree = load_tree(a.tree);
    if (!sim::is_scenario(a.scenario)) throw UsageError("unknown scenario '" + a.scenario + "'");
    sim::ScenarioParams params;
    if (!a.config.empty()) {
        try {
            params = sim::parse_params(slurp(a.config));
        } catch (const sim::ConfigError& e) {
            throw UsageError(a.config + ": " + e.what());
        }
    }
    EngineConfig cfg;
    cfg.max_ticks = a.ticks;
    cfg.policy = a.policy;

    Trace trace;
    try {
        trace = sim::run_scenario(tree, a.scenario, params, cfg);
    } catch (const InvalidTree& e) {
        throw UsageError(e.what());
    }

    std::string path = a.trace;
    if (path.empty()) {
        if (const char* dir = std::getenv("CBT_TRACE_DIR"); dir && *dir) {
            path = (fs::path(dir) / (fs::path(a.tree).stem().string() + "-" + a.scenario + ".jsonl")).string();
        }
    }
    if (path.empty() || path == "-") {
        std::cout << to_jsonl(trace);
        std::cerr << result_line(trace) << '\n';
    } else {
        write_trace(trace, path);
        std::cout << result_line(trace) << '\n';
    }
    return kOk;
}

int cmd_check(const std::string& path, const std::string& property, std::optional<int> bound) {
    Trace trace;
    try {
        trace = trace_from_jsonl(slurp(path));
    } catch (const TraceFormatError& e) {
        throw UsageError(path + ": " + e.what());
    }
    const int k = bound.value_or(starvation_bound(trace.tree, PolicyConfig{}));
    VerdictReport report;
    try {
        report = check_all(trace, property, k);
    } catch (const TraceFormatError& e) {
        throw UsageError(path + ": " + e.what());
    }
    std::cout << report.to_json() << '\n';
    return report.pass() ? kOk : kFailed;
}

int cmd_parse(const std::string& path) {
    std::cout << dsl::serialize(load_tree(path));
    return kOk;
}

int cmd_demo(const std::string& name, const std::string& trace_path) {
    const NodeSpec tree = sim::build_usecase_tree();
    const PolicyConfig policy;
    EngineConfig cfg;
    cfg.policy = policy;
    const Trace trace = sim::run_scenario(tree, name, {}, cfg);
    if (!trace_path.empty()) write_trace(trace, trace_path);

    const TreeIndex index(trace.tree);
    const int bound = starvation_bound(trace.tree, policy);
    std::cout << "demo " << name << ": " << result_line(trace) << '\n';

    const auto episodes = barrier_episodes(trace);
    std::cout << "barrier episodes: " << episodes.size() << '\n';
    for (const auto& ep : episodes) {
        std::cout << "  ticks " << ep.first_tick << "-" << ep.last_tick << ": held at progress " << ep.frozen_progress
                  << ", waiting:";
        for (const auto& w : ep.waiting) std::cout << ' ' << leaf_name(index, w);
        std::cout << '\n';
    }

    const auto handovers = resource_handovers(trace);
    std::cout << "speaker handovers: " << handovers.size() << '\n';
    for (const auto& h : handovers) {
        std::cout << "  tick " << h.tick << ": " << h.resource << " from " << leaf_name(index, h.from) << " to "
                  << leaf_name(index, h.to) << '\n';
    }

    const auto barrier = verify_barrier(trace);
    const auto mutex = verify_mutex(trace);
    const auto liveness = verify_liveness(trace, bound);
    auto verdict = [](const VerdictReport& r) { return r.pass() ? "pass" : "FAIL"; };
    std::cout << "checks: barrier " << verdict(barrier) << ", mutex " << verdict(mutex) << ", liveness "
              << verdict(liveness) << " (bound " << bound << ")\n";
    const bool ok = barrier.pass() && mutex.pass() && liveness.pass() && trace.result == RunResult::Success;
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concurrent behavior tree runner"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a tree against a scenario and emit its trace");
    run_cmd->add_option("tree", run.tree, "tree file (.cbt)")->required();
    run_cmd->add_option("scenario", run.scenario, "scenario name (hallway, office)")->required();
    run_cmd->add_option("--config", run.config, "key=value scenario parameters");
    run_cmd->add_option("--ticks", run.ticks, "tick limit")->check(CLI::PositiveNumber);
    run_cmd->add_option("--trace", run.trace, "trace output path (default: stdout)");
    run_cmd->add_option("--aging-increment", run.policy.aging_increment, "priority gained per denied tick")
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--hold-bonus", run.policy.hold_bonus, "priority bonus while holding a grant")
        ->check(CLI::NonNegativeNumber);

    std::string check_path;
    std::string property = "all";
    std::optional<int> bound;
    auto* check_cmd = app.add_subcommand("check", "Verify a trace");
    check_cmd->add_option("trace", check_path, "trace file (.jsonl)")->required();
    check_cmd->add_option("--property", property, "barrier | mutex | liveness | all")
        ->check(CLI::IsMember({"barrier", "mutex", "liveness", "all"}));
    check_cmd->add_option("--bound", bound, "starvation bound in ticks")->check(CLI::PositiveNumber);

    std::string parse_path;
    auto* parse_cmd = app.add_subcommand("parse", "Print the canonical form of a tree file");
    parse_cmd->add_option("file", parse_path, "tree file (.cbt)")->required();

    std::string demo_name;
    std::string demo_trace;
    auto* demo_cmd = app.add_subcommand("demo", "Run a use case with defaults and summarize it");
    demo_cmd->add_option("name", demo_name, "hallway | office")
        ->required()
        ->check(CLI::IsMember(sim::scenario_names()));
    demo_cmd->add_option("--trace", demo_trace, "also write the trace here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*check_cmd) return cmd_check(check_path, property, bound);
        if (*parse_cmd) return cmd_parse(parse_path);
        if (*demo_cmd) return cmd_demo(demo_name, demo_trace);
    } catch (const UsageError& e) {
        std::cerr << "cbt: " << e.what() << '\n';
        return kUsage;
    } catch (const ContractViolation& e) {
        std::cerr << "cbt: contract violation: " << e.what() << '\n';
        return kFailed;
    }
    return kUsage;
}
