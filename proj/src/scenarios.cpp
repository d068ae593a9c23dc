#include "cbt/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace cbt::sim {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text, int line) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError("line " + std::to_string(line) + ": bad value '" + std::string(text) + "' for " +
                          std::string(key));
    }
    return value;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

ScenarioParams parse_params(std::string_view text) {
    ScenarioParams p;
    using Setter = std::function<void(std::string_view, std::string_view, int)>;
    auto real = [](double& field) -> Setter {
        return [&field](std::string_view k, std::string_view v, int line) { field = parse_number<double>(k, v, line); };
    };
    auto integer = [](int& field) -> Setter {
        return [&field](std::string_view k, std::string_view v, int line) { field = parse_number<int>(k, v, line); };
    };
    const std::map<std::string, Setter, std::less<>> setters = {
        {"nav_speed", real(p.nav_speed)},
        {"seek_speed", real(p.seek_speed)},
        {"object_pos", real(p.object_pos)},
        {"recognition_ticks", integer(p.recognition_ticks)},
        {"person_tick", integer(p.person_tick)},
        {"lights_fixed_tick", integer(p.lights_fixed_tick)},
        {"ask_light_utterances", integer(p.ask_light_utterances)},
        {"ask_move_utterances", integer(p.ask_move_utterances)},
        {"base_priority_light", integer(p.base_priority_light)},
        {"base_priority_move", integer(p.base_priority_move)},
    };

    std::set<std::string, std::less<>> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = raw;
        if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        const std::string where = "line " + std::to_string(line) + ": ";
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key=value");
        const auto key = trim(s.substr(0, eq));
        const auto value = trim(s.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (!seen.insert(std::string(key)).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        if (value.empty()) throw ConfigError(where + "missing value for " + std::string(key));
        it->second(key, value, line);
        if (key == "base_priority_light" || key == "base_priority_move") p.priorities_set = true;
    }

    require(p.nav_speed > 0 && p.nav_speed <= 1, "nav_speed must be in (0, 1]");
    require(p.seek_speed > 0 && p.seek_speed <= 1, "seek_speed must be in (0, 1]");
    require(p.object_pos > 0 && p.object_pos <= 1, "object_pos must be in (0, 1]");
    require(p.recognition_ticks >= 1, "recognition_ticks must be >= 1");
    require(p.ask_light_utterances >= 1, "ask_light_utterances must be >= 1");
    require(p.ask_move_utterances >= 1, "ask_move_utterances must be >= 1");
    require(p.base_priority_light >= 0 && p.base_priority_move >= 0, "base priorities must be >= 0");
    return p;
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"hallway", "office"};
    return names;
}

bool is_scenario(std::string_view name) {
    const auto& names = scenario_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

OfficeWorld office_script_default() {
    OfficeWorld w;
    w.ask_light = Speech{4};
    w.ask_move = Speech{2};
    return w;
}

UseCaseWorld make_world(std::string_view scenario, const ScenarioParams& params) {
    if (!is_scenario(scenario)) throw std::invalid_argument("unknown scenario '" + std::string(scenario) + "'");
    UseCaseWorld w;
    w.hall.nav_speed = params.nav_speed;
    w.hall.seek_speed = params.seek_speed;
    w.hall.objects.push_back({params.object_pos, params.recognition_ticks, false});

    w.office = office_script_default();
    w.office.ask_light = Speech{params.ask_light_utterances};
    w.office.ask_move = Speech{params.ask_move_utterances};
    if (scenario == "hallway") {
        w.office.light_good = true;
        w.office.person_tick = -1;
        w.office.lights_fixed_tick = -1;
    } else {
        w.office.person_tick = params.person_tick;
        w.office.lights_fixed_tick = params.lights_fixed_tick;
    }
    return w;
}

void apply_script(UseCaseWorld& world, int tick) {
    world.clock = tick;
    world.office.speaker_busy_by.reset();
    if (tick == world.office.person_tick) world.office.person_in_front = true;
    if (tick == world.office.lights_fixed_tick) world.office.light_good = true;
}

Status navigate_step(HallwayWorld& w) {
    ++w.nav_steps;
    w.robot_pos = std::min(1.0, w.nav_start + w.nav_steps * w.nav_speed);
    return w.robot_pos >= 1.0 ? Status::Success : Status::Running;
}

Status seek_step(HallwayWorld& w) {
    if (w.recognizing) {
        if (--*w.recognition_remaining <= 0) {
            w.objects[*w.recognizing].recognized = true;
            w.recognizing.reset();
            w.recognition_remaining.reset();
        }
        return w.seek_pos >= 1.0 ? Status::Success : Status::Running;
    }
    const double next = std::min(1.0, w.seek_start + (w.seek_steps + 1) * w.seek_speed);
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < w.objects.size(); ++i) {
        const auto& o = w.objects[i];
        if (o.recognized || o.position <= w.seek_pos || o.position > next) continue;
        if (!hit || o.position < w.objects[*hit].position) hit = i;
    }
    if (hit) {
        const auto& o = w.objects[*hit];
        // Landing on the lattice point itself counts as the step, and the
        // lattice value is kept so that Navigate's position compares equal.
        if (next - o.position < 1e-9) {
            ++w.seek_steps;
            w.seek_pos = next;
        } else {
            w.seek_pos = o.position;
        }
        w.recognizing = hit;
        w.recognition_remaining = o.recognition_ticks;
        return Status::Running;
    }
    ++w.seek_steps;
    w.seek_pos = next;
    return w.seek_pos >= 1.0 ? Status::Success : Status::Running;
}

Status speech_step(Speech& s) {
    if (s.spoken >= s.utterances || s.aborted) {
        s.spoken = 0;
        s.aborted = false;
    }
    ++s.spoken;
    return s.spoken == s.utterances ? Status::Success : Status::Running;
}

const ResourceCatalog& usecase_catalog() {
    static const ResourceCatalog catalog = [] {
        ResourceCatalog c;
        c.intern("speaker");
        return c;
    }();
    return catalog;
}

namespace {

void claim_speaker(OfficeWorld& office, const std::string& who) {
    if (office.speaker_busy_by && *office.speaker_busy_by != who) ++office.speaker_conflicts;
    office.speaker_busy_by = who;
}

LeafBehavior<UseCaseWorld> speech_leaf(const std::string& name, Speech OfficeWorld::*speech,
                                       bool clears_person) {
    const ResourceSet speaker{*usecase_catalog().find("speaker")};
    LeafBehavior<UseCaseWorld> b;
    b.tick = [=](UseCaseWorld& w) {
        claim_speaker(w.office, name);
        const Status s = speech_step(w.office.*speech);
        if (s == Status::Success && clears_person) w.office.person_in_front = false;
        return s;
    };
    b.progress = [=](const UseCaseWorld& w) { return Progress(progress_of(w.office.*speech)); };
    b.resources = [=](const UseCaseWorld&) { return speaker; };
    b.halt = [=](UseCaseWorld& w) { (w.office.*speech).aborted = true; };
    b.pause = [](UseCaseWorld&) {};
    return b;
}

}  // namespace

BehaviorRegistry<UseCaseWorld> usecase_registry() {
    BehaviorRegistry<UseCaseWorld> reg;

    LeafBehavior<UseCaseWorld> navigate;
    navigate.tick = [](UseCaseWorld& w) { return navigate_step(w.hall); };
    navigate.progress = [](const UseCaseWorld& w) { return Progress(w.hall.robot_pos); };
    navigate.pause = [](UseCaseWorld&) {};
    navigate.halt = [](UseCaseWorld&) {};
    reg.add_action("Navigate", navigate);

    LeafBehavior<UseCaseWorld> seek;
    seek.tick = [](UseCaseWorld& w) { return seek_step(w.hall); };
    seek.progress = [](const UseCaseWorld& w) { return Progress(w.hall.seek_pos); };
    seek.pause = [](UseCaseWorld&) {};
    seek.halt = [](UseCaseWorld&) {};
    reg.add_action("Seek", seek);

    reg.add_action("AskPeopleToMove", speech_leaf("AskPeopleToMove", &OfficeWorld::ask_move, true));
    reg.add_action("AskForBetterLight", speech_leaf("AskForBetterLight", &OfficeWorld::ask_light, false));

    reg.add_condition("NoPeopleInFront", [](const UseCaseWorld& w) { return !w.office.person_in_front; });
    reg.add_condition("LightLevelGood", [](const UseCaseWorld& w) { return w.office.light_good; });
    return reg;
}

NodeSpec build_usecase_tree(const ScenarioParams& params) {
    NodeSpec tree = parallel_mutex({
        with_priority(fallback({condition("NoPeopleInFront"), action("AskPeopleToMove")}),
                      params.base_priority_move),
        with_priority(fallback({condition("LightLevelGood"), action("AskForBetterLight")}),
                      params.base_priority_light),
        parallel_sync({action("Navigate"), action("Seek")}),
    });
    assign_default_ids(tree);
    return tree;
}

void set_priority_of_branch(NodeSpec& tree, std::string_view leaf, int base) {
    auto contains = [&](const NodeSpec& sub) {
        bool found = false;
        for_each_node(sub, [&](const NodeSpec& n) { found = found || (is_leaf(n.kind) && n.leaf_ref == leaf); });
        return found;
    };
    auto visit = [&](auto&& self, NodeSpec& n) -> void {
        for (auto& c : n.children) {
            if (n.kind == NodeKind::ParallelMutex && contains(c)) c.base_priority = base;
            self(self, c);
        }
    };
    visit(visit, tree);
}

Engine<UseCaseWorld> make_engine(const NodeSpec& tree, EngineConfig cfg) {
    Engine<UseCaseWorld> engine(tree, usecase_registry(), usecase_catalog(), cfg);
    engine.on_tick_start(apply_script);
    return engine;
}

Trace run_scenario(const NodeSpec& tree, std::string_view scenario, const ScenarioParams& params, EngineConfig cfg) {
    UseCaseWorld world = make_world(scenario, params);
    NodeSpec bound = tree;
    if (params.priorities_set) {
        set_priority_of_branch(bound, "AskPeopleToMove", params.base_priority_move);
        set_priority_of_branch(bound, "AskForBetterLight", params.base_priority_light);
    }
    auto engine = make_engine(bound, cfg);
    return engine.run(world);
}

ContenderRun run_contenders(std::vector<int> base_priorities, std::vector<int> utterances,
                            const PolicyConfig& policy, int max_ticks) {
    if (base_priorities.size() != utterances.size() || utterances.empty()) {
        throw std::invalid_argument("one base priority and one speech length per contender");
    }
    const ResourceSet speaker{*usecase_catalog().find("speaker")};
    BehaviorRegistry<ContenderWorld> reg;
    ContenderWorld world;
    std::vector<NodeSpec> children;
    for (std::size_t i = 0; i < utterances.size(); ++i) {
        world.speeches.push_back(Speech{utterances[i]});
        const std::string name = "Speak" + std::to_string(i);
        LeafBehavior<ContenderWorld> b;
        b.tick = [i](ContenderWorld& w) {
            Speech& s = w.speeches[i];
            if (s.spoken < s.utterances) ++s.spoken;
            return s.spoken == s.utterances ? Status::Success : Status::Running;
        };
        b.progress = [i](const ContenderWorld& w) { return Progress(progress_of(w.speeches[i])); };
        b.resources = [i, speaker](const ContenderWorld& w) {
            const Speech& s = w.speeches[i];
            return s.spoken < s.utterances ? speaker : ResourceSet{};
        };
        reg.add_action(name, std::move(b));
        children.push_back(with_priority(action(name), base_priorities[i]));
    }
    EngineConfig cfg;
    cfg.max_ticks = max_ticks;
    cfg.policy = policy;
    Engine<ContenderWorld> engine(parallel_mutex(std::move(children)), reg, usecase_catalog(), cfg);
    ContenderRun out;
    for (const auto& c : engine.tree().children) out.child_ids.push_back(c.id);
    out.trace = engine.run(world);
    return out;
}

}  // namespace cbt::sim
