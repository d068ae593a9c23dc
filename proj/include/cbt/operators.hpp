#pragma once

// Tick semantics of the operator nodes as pure decision functions, plus the
// progress/resource composition rules for concurrent trees.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cbt/core.hpp"

namespace cbt::ops {

/// Outcome of routing ticks through Sequence/Fallback children.
struct Routing {
    Status status;
    std::size_t ticked;  ///< children that received a tick, counted from the left
};

/// Fallback: stops at the first child returning Running or Success.
Routing tick_fallback(std::size_t child_count, const std::function<Status(std::size_t)>& tick_child);
/// Sequence: stops at the first child returning Running or Failure.
Routing tick_sequence(std::size_t child_count, const std::function<Status(std::size_t)>& tick_child);

/// Parallel aggregation. Success when at least `threshold` children succeed
/// (default: all), Failure when more than N - threshold fail, else Running.
Status aggregate_parallel(std::span<const Status> statuses, std::optional<int> threshold = {});

enum class Gate { Ticked, Paused, NotReached };
enum class GateReason { None, BarrierWait, ResourceWait, ShortCircuit };

struct ChildGate {
    Gate flag = Gate::NotReached;
    GateReason reason = GateReason::None;
    friend bool operator==(const ChildGate&, const ChildGate&) = default;
};

struct GateDecision {
    std::vector<ChildGate> children;
    /// Dispatch order: every child index exactly once.
    std::vector<std::size_t> order;

    bool ticked(std::size_t i) const { return children.at(i).flag == Gate::Ticked; }
    friend bool operator==(const GateDecision&, const GateDecision&) = default;
};

/// Barrier gate: child i is ticked iff p_i <= min_j p_j over the snapshot.
GateDecision gate_parallel_sync(std::span<const Progress> snapshot);

/// Resource gate: children visited by descending effective priority (ties go
/// to the lower index); a child is ticked iff its resources are disjoint from
/// everything already granted this tick.
GateDecision gate_parallel_mutex(std::span<const ResourceSet> resources, std::span<const int> effective_priority);

/// Resources granted by a mutex decision.
ResourceSet granted_resources(const GateDecision& decision, std::span<const ResourceSet> resources);

/// Status of a gated parallel node. Children that were not ticked contribute
/// `retained` (their last returned status, Running if never ticked).
struct GatedTick {
    Status status;
    GateDecision decision;
};

GatedTick tick_gated(GateDecision decision, std::span<const std::optional<Status>> retained,
                     const std::function<Status(std::size_t)>& tick_child, std::optional<int> threshold = {});

GatedTick tick_parallel_sync(std::span<const Progress> snapshot, std::span<const std::optional<Status>> retained,
                             const std::function<Status(std::size_t)>& tick_child,
                             std::optional<int> threshold = {});

GatedTick tick_parallel_mutex(std::span<const ResourceSet> resources, std::span<const int> effective_priority,
                              std::span<const std::optional<Status>> retained,
                              const std::function<Status(std::size_t)>& tick_child);

// Composition of progress and resources.

Progress compose_progress_sequence(Progress first, Progress second, bool first_succeeded);
Progress compose_progress_fallback(Progress first, Progress second, bool first_failed);

struct Composite {
    Progress progress;
    ResourceSet resources;
    friend bool operator==(const Composite&, const Composite&) = default;
};

/// (min of progresses, union of resources). Lists must be nonempty and of equal length.
Composite compose_parallel(std::span<const Progress> progress, std::span<const ResourceSet> resources);

/// Index of the child whose region decides a Sequence: the first child not in
/// its success region, or the last child when all succeed.
std::size_t sequence_active_child(std::span<const Status> regions);
/// Same for Fallback with failure regions.
std::size_t fallback_active_child(std::span<const Status> regions);

/// N-ary Sequence progress: (j + p_j) / N with j = sequence_active_child.
/// Reduces to p_1/2 and 0.5 + p_2/2 for two children.
Progress sequence_progress(std::span<const Status> regions, std::span<const Progress> progress);

}  // namespace cbt::ops
