#include <fstream>
#include <sstream>

#include "cbt/dsl.hpp"
#include "cbt/scenarios.hpp"
#include "cbt/verify.hpp"
#include "doctest.h"
#include "trace_checks.hpp"

using namespace cbt;
using namespace cbt::sim;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const TraceEvent* event_at(const Trace& t, int tick, const std::string& node) {
    for (const auto& e : t.events) {
        if (e.tick == tick && e.node == node) return &e;
    }
    return nullptr;
}

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("navigate advances by its speed and stops at the end") {
    HallwayWorld w;
    w.nav_speed = 0.25;
    CHECK(navigate_step(w) == Status::Running);
    CHECK(w.robot_pos == 0.25);
    navigate_step(w);
    navigate_step(w);
    CHECK(navigate_step(w) == Status::Success);
    CHECK(w.robot_pos == 1.0);
}

TEST_CASE("seek stops at an object and recognizes it") {
    HallwayWorld w;
    w.seek_speed = 0.2;
    w.objects.push_back({0.3, 2, false});
    CHECK(seek_step(w) == Status::Running);
    CHECK(w.seek_pos == doctest::Approx(0.2));
    CHECK(seek_step(w) == Status::Running);
    CHECK(w.seek_pos == 0.3);
    CHECK(w.recognizing.has_value());
    seek_step(w);
    CHECK(w.recognizing.has_value());
    seek_step(w);
    CHECK_FALSE(w.recognizing.has_value());
    CHECK(w.objects[0].recognized);
    CHECK(w.seek_pos == 0.3);
    seek_step(w);
    CHECK(w.seek_pos == doctest::Approx(0.4));
}

TEST_CASE("speech restarts after an abort") {
    Speech s{3};
    CHECK(speech_step(s) == Status::Running);
    CHECK(progress_of(s) == doctest::Approx(1.0 / 3.0));
    s.aborted = true;
    CHECK(speech_step(s) == Status::Running);
    CHECK(s.spoken == 1);
    speech_step(s);
    CHECK(speech_step(s) == Status::Success);
    CHECK(progress_of(s) == 1.0);
}

TEST_CASE("hallway keeps Navigate within one step of Seek") {
    const auto tree = build_usecase_tree();
    auto engine = make_engine(tree);
    auto world = make_world("hallway");
    int ticks = 0;
    Status s = Status::Running;
    double worst = 0;
    while (s == Status::Running && ticks < 200) {
        s = engine.step(world);
        ++ticks;
        worst = std::max(worst, world.hall.robot_pos - world.hall.seek_pos);
        CHECK(world.hall.robot_pos - world.hall.seek_pos <= world.hall.nav_speed + 1e-12);
    }
    CHECK(s == Status::Success);
    CHECK(ticks == 25);
    CHECK(worst > 0);
    CHECK(world.hall.objects[0].recognized);
}

TEST_CASE("navigate is never ticked while ahead") {
    const auto trace = run_scenario(build_usecase_tree(), "hallway");
    int paused = 0;
    for (int k = 0; k < trace.ticks; ++k) {
        const auto* nav = event_at(trace, k, "0.2.0");
        const auto* seek = event_at(trace, k, "0.2.1");
        REQUIRE(nav);
        REQUIRE(seek);
        if (nav->progress > seek->progress) {
            CHECK(nav->event != EventKind::Ticked);
            ++paused;
        }
    }
    CHECK(paused == 5);
}

TEST_CASE("two objects give two frozen episodes") {
    const auto tree = build_usecase_tree();
    auto engine = make_engine(tree);
    auto world = make_world("hallway");
    world.hall.objects = {{0.3, 3, false}, {0.6, 2, false}};
    const auto trace = engine.run(world);
    CHECK(trace.result == RunResult::Success);
    const auto episodes = barrier_episodes(trace);
    REQUIRE(episodes.size() == 2);
    CHECK(episodes[0].frozen_progress == doctest::Approx(0.3));
    CHECK(episodes[1].frozen_progress == doctest::Approx(0.6));
    CHECK(episodes[0].last_tick - episodes[0].first_tick + 1 == 3);
    CHECK(episodes[1].last_tick - episodes[1].first_tick + 1 == 2);
    CHECK(verify_barrier(trace).pass());
}

TEST_CASE("office hands the speaker to the people request once") {
    const auto trace = run_scenario(build_usecase_tree(), "office");
    CHECK(trace.result == RunResult::Success);
    CHECK(trace.ticks == 25);
    CHECK(verify_mutex(trace).pass());
    const auto h = resource_handovers(trace);
    REQUIRE(h.size() == 1);
    CHECK(h[0].tick == 2);
    CHECK(checks::dispatch_problems(trace).empty());
}

TEST_CASE("office world never double-books the speaker") {
    const auto tree = build_usecase_tree();
    auto engine = make_engine(tree);
    auto world = make_world("office");
    engine.run(world);
    CHECK(world.office.speaker_conflicts == 0);
    CHECK(world.office.light_good);
    CHECK_FALSE(world.office.person_in_front);
}

TEST_CASE("office variants") {
    SUBCASE("nobody shows up") {
        ScenarioParams p;
        p.person_tick = -1;
        const auto trace = run_scenario(build_usecase_tree(p), "office", p);
        CHECK(trace.result == RunResult::Success);
        CHECK(resource_handovers(trace).empty());
        for (const auto& e : trace.events) CHECK(e.node != "0.0.1");
    }
    SUBCASE("both triggers at once with equal priorities") {
        ScenarioParams p;
        p.person_tick = 0;
        p.base_priority_move = 0;
        p.base_priority_light = 0;
        p.priorities_set = true;
        const auto trace = run_scenario(build_usecase_tree(), "office", p);
        const auto* move = event_at(trace, 0, "0.0");
        const auto* light = event_at(trace, 0, "0.1");
        REQUIRE(move);
        REQUIRE(light);
        CHECK(move->event == EventKind::Ticked);
        CHECK(light->event == EventKind::Paused);
        CHECK(verify_mutex(trace).pass());
        CHECK(trace.result == RunResult::Success);
    }
    SUBCASE("lights never fixed keeps asking") {
        ScenarioParams p;
        p.lights_fixed_tick = -1;
        const auto trace = run_scenario(build_usecase_tree(), "office", p);
        // A finished request counts as success for its branch, so the run
        // still ends once the main task is done.
        CHECK(trace.result == RunResult::Success);
        int requests = 0;
        for (const auto& e : trace.events) {
            if (e.node == "0.1.1" && e.event == EventKind::Ticked && e.status == Status::Success) ++requests;
        }
        CHECK(requests >= 2);
        CHECK(verify_mutex(trace).pass());
    }
}

TEST_CASE("config files") {
    const auto p = parse_params("# office tweaks\nperson_tick = 3\n\nnav_speed=0.1  # faster\nbase_priority_light = 2\n");
    CHECK(p.person_tick == 3);
    CHECK(p.nav_speed == 0.1);
    CHECK(p.base_priority_light == 2);
    CHECK(p.priorities_set);
    CHECK_FALSE(parse_params("person_tick = 3").priorities_set);

    CHECK_THROWS_WITH_AS(parse_params("speed = 1"), "line 1: unknown key 'speed'", ConfigError);
    CHECK_THROWS_WITH_AS(parse_params("nav_speed = fast"), "line 1: bad value 'fast' for nav_speed", ConfigError);
    CHECK_THROWS_AS(parse_params("person_tick = 1\nperson_tick = 2"), ConfigError);
    CHECK_THROWS_AS(parse_params("nav_speed = 0"), ConfigError);
    CHECK_THROWS_AS(parse_params("recognition_ticks = 0"), ConfigError);
    CHECK_THROWS_AS(parse_params("just words"), ConfigError);
    CHECK_THROWS_AS(parse_params("object_pos ="), ConfigError);
    CHECK_THROWS_AS(make_world("kitchen"), std::invalid_argument);
}

TEST_CASE("config priorities override the tree") {
    NodeSpec tree = build_usecase_tree();
    set_priority_of_branch(tree, "AskForBetterLight", 7);
    CHECK(tree.children[1].base_priority == 7);
    CHECK(tree.children[0].base_priority == 1);
}

TEST_CASE("the shipped tree file matches the built tree") {
    const auto text = slurp(std::string(CBT_DATA_DIR) + "/usecase.cbt");
    CHECK(dsl::parse(text) == build_usecase_tree());
}

TEST_CASE("golden traces") {
    const auto tree = build_usecase_tree();
    for (const char* name : {"hallway", "office"}) {
        CAPTURE(name);
        const auto golden = slurp(std::string(CBT_DATA_DIR) + "/golden/" + name + ".jsonl");
        CHECK(to_jsonl(run_scenario(tree, name)) == golden);
        const auto parsed = trace_from_jsonl(golden);
        CHECK(checks::halt_pause_exclusive(parsed));
        CHECK(checks::dispatch_problems(parsed).empty());
    }
}

TEST_CASE("contenders take turns within the bound") {
    const PolicyConfig policy{1, 2};
    const auto run = run_contenders({3, 0}, {6, 2}, policy);
    CHECK(run.trace.result == RunResult::Success);
    const int bound = starvation_bound(3, 0, policy);
    CHECK(max_consecutive_pauses(run.trace, run.child_ids[1]) <= bound);
    CHECK(verify_mutex(run.trace).pass());
    CHECK(verify_liveness(run.trace, bound).pass());
    CHECK_THROWS_AS(run_contenders({1}, {1, 2}, policy), std::invalid_argument);
}

}  // TEST_SUITE
