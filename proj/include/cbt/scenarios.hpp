#pragma once

// Deterministic worlds for the two use cases: a hallway where Navigate and
// Seek must stay in step, and a dark office where two speech actions share
// one speaker. Both run under the same tree (see build_usecase_tree).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbt/engine.hpp"

namespace cbt::sim {

struct HallwayWorld {
    struct Object {
        double position = 0.5;
        int recognition_ticks = 5;
        bool recognized = false;
    };

    double nav_speed = 0.05;
    double nav_start = 0.0;
    int nav_steps = 0;
    double robot_pos = 0.0;

    double seek_speed = 0.05;
    double seek_start = 0.0;
    int seek_steps = 0;
    double seek_pos = 0.0;

    std::vector<Object> objects;
    std::optional<int> recognition_remaining;
    std::optional<std::size_t> recognizing;  ///< index into objects
};

struct Speech {
    int utterances = 1;
    int spoken = 0;
    bool aborted = false;  ///< set by halt; the next tick starts over
};

struct OfficeWorld {
    bool light_good = false;
    bool person_in_front = false;
    int person_tick = 1;          ///< negative: nobody shows up
    int lights_fixed_tick = 8;    ///< negative: lights stay as they are
    Speech ask_light{4};
    Speech ask_move{2};
    std::optional<std::string> speaker_busy_by;
    int speaker_conflicts = 0;
};

struct UseCaseWorld {
    HallwayWorld hall;
    OfficeWorld office;
    int clock = 0;
};

/// Flat key=value parameters shared by both scenarios.
struct ScenarioParams {
    double nav_speed = 0.05;
    double seek_speed = 0.05;
    double object_pos = 0.5;
    int recognition_ticks = 5;
    int person_tick = 1;
    int lights_fixed_tick = 8;
    int ask_light_utterances = 4;
    int ask_move_utterances = 2;
    int base_priority_light = 0;
    int base_priority_move = 1;
    bool priorities_set = false;  ///< a config file named either base priority
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// `key = value` lines; `#` starts a comment. Unknown keys are rejected.
ScenarioParams parse_params(std::string_view text);

const std::vector<std::string>& scenario_names();
bool is_scenario(std::string_view name);

/// Initial world of a named scenario.
UseCaseWorld make_world(std::string_view scenario, const ScenarioParams& params = {});
OfficeWorld office_script_default();

/// Resource ids used by the leaves ("speaker").
const ResourceCatalog& usecase_catalog();
BehaviorRegistry<UseCaseWorld> usecase_registry();

/// Scripted exogenous events: clock, person arrival, lights.
void apply_script(UseCaseWorld& world, int tick);

/// parallel-mutex over the people monitor, the light monitor and the
/// synchronized main task, in that order.
NodeSpec build_usecase_tree(const ScenarioParams& params = {});

/// Sets the :priority of every mutex child that contains the given leaf.
void set_priority_of_branch(NodeSpec& tree, std::string_view leaf, int base);

Engine<UseCaseWorld> make_engine(const NodeSpec& tree, EngineConfig cfg = {});

/// Runs a named scenario to completion and returns the trace.
Trace run_scenario(const NodeSpec& tree, std::string_view scenario, const ScenarioParams& params = {},
                   EngineConfig cfg = {});

// Leaf steps, exposed for unit tests.
Status navigate_step(HallwayWorld& w);
Status seek_step(HallwayWorld& w);
Status speech_step(Speech& s);
inline double progress_of(const Speech& s) { return static_cast<double>(s.spoken) / s.utterances; }

// Two speech actions competing for one speaker, used for the aging grid.
struct ContenderWorld {
    std::vector<Speech> speeches;
};

struct ContenderRun {
    Trace trace;
    std::vector<std::string> child_ids;
};

ContenderRun run_contenders(std::vector<int> base_priorities, std::vector<int> utterances,
                            const PolicyConfig& policy, int max_ticks = 1000);

}  // namespace cbt::sim
