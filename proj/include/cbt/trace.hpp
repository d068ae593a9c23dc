#pragma once

// Append-only execution record, the sole input of the verifiers.
//
// JSON-lines layout:
//   {"tree": "<canonical .cbt text>"}                       header
//   {"tick": 0, "node": "0.1", "event": "ticked", "status": "R",
//    "progress": 0.25, "resources": ["speaker"]}            one per event
//   {"result": "success", "ticks": 25}                      footer

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbt/core.hpp"

namespace cbt {

enum class EventKind { Ticked, Paused, Halted };
enum class RunResult { Success, Failure, Timeout };

std::string_view to_string(EventKind e);
std::string_view to_string(RunResult r);

struct TraceEvent {
    int tick = 0;
    std::string node;
    EventKind event = EventKind::Ticked;
    std::optional<Status> status;  ///< Ticked events only
    double progress = 0.0;         ///< value read when the node was dispatched
    std::vector<std::string> resources;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct Trace {
    NodeSpec tree;
    std::vector<TraceEvent> events;
    std::optional<RunResult> result;
    int ticks = 0;
    double delta_t = 1.0;

    /// Events of one tick, in dispatch order.
    std::vector<const TraceEvent*> at(int tick) const;
};

class TraceFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string event_to_json(const TraceEvent& e);
std::string to_jsonl(const Trace& trace);
Trace trace_from_jsonl(std::string_view text);

/// Structural view of a trace's tree for the verifiers.
struct TreeIndex {
    struct Entry {
        const NodeSpec* node = nullptr;
        const NodeSpec* parent = nullptr;
    };
    std::vector<Entry> nodes;  ///< preorder

    explicit TreeIndex(const NodeSpec& root);
    const Entry* find(std::string_view id) const;
};

}  // namespace cbt
