#pragma once

// Trace verifiers for the barrier, mutual exclusion and liveness properties,
// and summaries of the episodes they look at.

#include <string>
#include <vector>

#include "cbt/trace.hpp"

namespace cbt {

struct Violation {
    std::string property;  ///< "barrier" | "mutex" | "deadlock" | "starvation"
    int tick = 0;
    std::string node;
    std::string detail;
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct VerdictReport {
    std::vector<Violation> violations;

    bool pass() const noexcept { return violations.empty(); }
    void merge(const VerdictReport& other);
    /// {"pass": bool, "violations": [{"property", "tick", "node", "detail"}]}
    std::string to_json() const;
};

/// Every ticked child of a Parallel or ParallelSync node has the minimum
/// progress among that node's dispatched children; every paused one exceeds it.
VerdictReport verify_barrier(const Trace& trace);

/// Children of a ParallelMutex ticked in the same tick hold disjoint resources.
VerdictReport verify_mutex(const Trace& trace);

/// Deadlock: a timed-out run must show a strict progress increase of some
/// node in every window of `bound` ticks. Starvation: no ParallelMutex child
/// is paused for more than `bound` consecutive ticks.
VerdictReport verify_liveness(const Trace& trace, int bound);

/// Longest run of consecutive ticks in which `node` was paused.
int max_consecutive_pauses(const Trace& trace, const std::string& node);

struct BarrierEpisode {
    std::string sync_node;
    int first_tick = 0;
    int last_tick = 0;
    double frozen_progress = 0.0;  ///< progress of the children that kept ticking
    std::vector<std::string> waiting;
};

/// Maximal runs of ticks in which some ParallelSync child was paused.
std::vector<BarrierEpisode> barrier_episodes(const Trace& trace);

struct Handover {
    int tick = 0;
    std::string resource;
    std::string from;  ///< action that held the resource at the previous tick
    std::string to;
};

/// Preemptions: the action ticked with `resource` changes and the previous
/// holder is paused in the same tick.
std::vector<Handover> resource_handovers(const Trace& trace);

/// Actions ticked while holding `resource`, per tick.
std::vector<std::vector<std::string>> resource_holders(const Trace& trace, const std::string& resource);

}  // namespace cbt
