#include <sstream>

#include "cbt/dsl.hpp"
#include "cbt/scenarios.hpp"
#include "cbt/verify.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cbt;

namespace {

std::string header(const std::string& tree) { return nlohmann::json{{"tree", tree}}.dump() + "\n"; }

std::string ev(int tick, const std::string& node, const std::string& event, const char* status, double progress,
               std::vector<std::string> resources = {}) {
    nlohmann::json j{{"tick", tick}, {"node", node}, {"event", event}, {"progress", progress},
                     {"resources", resources}};
    j["status"] = status ? nlohmann::json(status) : nlohmann::json(nullptr);
    return j.dump() + "\n";
}

std::string footer(const std::string& result, int ticks) {
    return nlohmann::json{{"result", result}, {"ticks", ticks}}.dump() + "\n";
}

const char* kSync = "(parallel-sync (action A) (action B))";
const char* kMutex = "(parallel-mutex (child (action A)) (child (action B)))";

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("planted barrier violation is found at its tick") {
    std::string text = header(kSync);
    text += ev(0, "0", "ticked", "R", 0.0) + ev(0, "0.0", "ticked", "R", 0.0) + ev(0, "0.1", "ticked", "R", 0.0);
    text += ev(1, "0", "ticked", "R", 0.5) + ev(1, "0.0", "ticked", "R", 0.7) + ev(1, "0.1", "ticked", "R", 0.5);
    const auto report = verify_barrier(trace_from_jsonl(text));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].tick == 1);
    CHECK(report.violations[0].node == "0.0");
    CHECK(report.violations[0].property == "barrier");

    std::string fine = header(kSync);
    fine += ev(0, "0", "ticked", "R", 0.5) + ev(0, "0.0", "paused", nullptr, 0.7) + ev(0, "0.1", "ticked", "R", 0.5);
    CHECK(verify_barrier(trace_from_jsonl(fine)).pass());

    std::string paused_low = header(kSync);
    paused_low += ev(0, "0", "ticked", "R", 0.5) + ev(0, "0.0", "paused", nullptr, 0.5) +
                  ev(0, "0.1", "ticked", "R", 0.5);
    CHECK_FALSE(verify_barrier(trace_from_jsonl(paused_low)).pass());
}

TEST_CASE("plain parallel on the hallway breaks the barrier, sync keeps it") {
    const auto sync_tree = sim::build_usecase_tree();
    NodeSpec plain = sync_tree;
    plain.children[2].kind = NodeKind::Parallel;
    const auto with_sync = sim::run_scenario(sync_tree, "hallway");
    const auto without = sim::run_scenario(plain, "hallway");
    CHECK(verify_barrier(with_sync).pass());
    const auto report = verify_barrier(without);
    CHECK_FALSE(report.pass());
    // Navigate runs ahead during the five recognition ticks of Seek.
    CHECK(report.violations.front().node == "0.2.0");
}

TEST_CASE("mutex verifier") {
    std::string clash = header(kMutex);
    clash += ev(0, "0", "ticked", "R", 0.0, {"speaker"}) + ev(0, "0.0", "ticked", "R", 0.0, {"speaker"}) +
             ev(0, "0.1", "ticked", "R", 0.0, {"speaker"});
    const auto report = verify_mutex(trace_from_jsonl(clash));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].tick == 0);
    CHECK(report.violations[0].node == "0.1");

    std::string apart = header(kMutex);
    apart += ev(0, "0", "ticked", "R", 0.0, {"speaker", "wheels"}) + ev(0, "0.0", "ticked", "R", 0.0, {"speaker"}) +
             ev(0, "0.1", "ticked", "R", 0.0, {"wheels"});
    CHECK(verify_mutex(trace_from_jsonl(apart)).pass());
}

TEST_CASE("liveness verifier") {
    std::string stuck = header(kMutex);
    for (int k = 0; k < 10; ++k) {
        stuck += ev(k, "0", "ticked", "R", 0.2) + ev(k, "0.0", "paused", nullptr, 0.2, {"speaker"}) +
                 ev(k, "0.1", "paused", nullptr, 0.4, {"speaker"});
    }
    stuck += footer("timeout", 10);
    const auto report = verify_liveness(trace_from_jsonl(stuck), 3);
    bool deadlock = false, starvation = false;
    for (const auto& v : report.violations) {
        deadlock = deadlock || v.property == "deadlock";
        starvation = starvation || v.property == "starvation";
    }
    CHECK(deadlock);
    CHECK(starvation);

    std::string lone = header("(parallel-mutex (child (action A)))");
    for (int k = 0; k < 4; ++k) lone += ev(k, "0", "ticked", "R", 0.0) + ev(k, "0.0", "ticked", "R", 0.0, {"speaker"});
    lone += footer("timeout", 4);
    CHECK(verify_liveness(trace_from_jsonl(lone), 5).pass());

    CHECK_THROWS_AS(verify_liveness(trace_from_jsonl(lone), 0), std::invalid_argument);
}

TEST_CASE("liveness on the office run with the computed bound") {
    const auto tree = sim::build_usecase_tree();
    const auto trace = sim::run_scenario(tree, "office");
    // Children bases are 1, 0 and 0 with the default hold bonus of 2.
    const int bound = std::max({starvation_bound(1, 1, {}), starvation_bound(1, 0, {})});
    CHECK(bound == 4);
    CHECK(verify_liveness(trace, bound).pass());
    CHECK(verify_liveness(trace, 12).pass());
}

TEST_CASE("verdict json") {
    VerdictReport r;
    CHECK(r.to_json() == R"({"pass":true,"violations":[]})");
    r.violations.push_back({"mutex", 3, "0.1", "clash"});
    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["pass"] == false);
    CHECK(j["violations"][0]["tick"] == 3);
    CHECK(j["violations"][0]["property"] == "mutex");
}

TEST_CASE("malformed traces are rejected") {
    CHECK_THROWS_AS(trace_from_jsonl(ev(0, "0", "ticked", "R", 0.0)), TraceFormatError);
    CHECK_THROWS_AS(trace_from_jsonl(header(kSync) + ev(0, "0", "ticked", nullptr, 0.0)), TraceFormatError);
    CHECK_THROWS_AS(trace_from_jsonl(header(kSync) + ev(0, "0", "ticked", "R", 1.5)), TraceFormatError);
    CHECK_THROWS_AS(trace_from_jsonl(header(kSync) + "{not json\n"), TraceFormatError);
    CHECK_THROWS_AS(verify_mutex(trace_from_jsonl(header(kSync) + ev(0, "9.9", "ticked", "R", 0.0))),
                    TraceFormatError);
}

TEST_CASE("trace json-lines round trip") {
    const auto trace = sim::run_scenario(sim::build_usecase_tree(), "office");
    const auto text = to_jsonl(trace);
    const auto back = trace_from_jsonl(text);
    CHECK(back.events == trace.events);
    CHECK(back.result == trace.result);
    CHECK(back.ticks == trace.ticks);
    CHECK(back.tree == trace.tree);
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    const auto first = nlohmann::json::parse(line);
    CHECK(first.size() == 6);
    for (const char* key : {"tick", "node", "event", "status", "progress", "resources"}) CHECK(first.contains(key));
}

TEST_CASE("episode summaries") {
    const auto tree = sim::build_usecase_tree();
    const auto hall = barrier_episodes(sim::run_scenario(tree, "hallway"));
    REQUIRE(hall.size() == 1);
    CHECK(hall[0].frozen_progress == 0.5);
    CHECK(hall[0].waiting == std::vector<std::string>{"0.2.0"});

    const auto office = sim::run_scenario(tree, "office");
    const auto handovers = resource_handovers(office);
    REQUIRE(handovers.size() == 1);
    CHECK(handovers[0].from == "0.1.1");
    CHECK(handovers[0].to == "0.0.1");
    CHECK(handovers[0].resource == "speaker");
    CHECK(max_consecutive_pauses(office, "0.1") == 2);
}

}  // TEST_SUITE
