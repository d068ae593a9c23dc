#include "cbt/operators.hpp"

#include <algorithm>
#include <numeric>

namespace cbt::ops {

Routing tick_fallback(std::size_t child_count, const std::function<Status(std::size_t)>& tick_child) {
    for (std::size_t i = 0; i < child_count; ++i) {
        Status s = tick_child(i);
        if (s != Status::Failure) return {s, i + 1};
    }
    return {Status::Failure, child_count};
}

Routing tick_sequence(std::size_t child_count, const std::function<Status(std::size_t)>& tick_child) {
    for (std::size_t i = 0; i < child_count; ++i) {
        Status s = tick_child(i);
        if (s != Status::Success) return {s, i + 1};
    }
    return {Status::Success, child_count};
}

Status aggregate_parallel(std::span<const Status> statuses, std::optional<int> threshold) {
    const int n = static_cast<int>(statuses.size());
    const int m = threshold.value_or(n);
    const auto successes = std::count(statuses.begin(), statuses.end(), Status::Success);
    const auto failures = std::count(statuses.begin(), statuses.end(), Status::Failure);
    if (successes >= m) return Status::Success;
    if (failures > n - m) return Status::Failure;
    return Status::Running;
}

GateDecision gate_parallel_sync(std::span<const Progress> snapshot) {
    GateDecision d;
    d.children.resize(snapshot.size());
    d.order.resize(snapshot.size());
    std::iota(d.order.begin(), d.order.end(), std::size_t{0});
    if (snapshot.empty()) return d;
    const Progress floor = *std::min_element(snapshot.begin(), snapshot.end());
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
        d.children[i] = snapshot[i] <= floor ? ChildGate{Gate::Ticked, GateReason::None}
                                             : ChildGate{Gate::Paused, GateReason::BarrierWait};
    }
    return d;
}

GateDecision gate_parallel_mutex(std::span<const ResourceSet> resources, std::span<const int> effective_priority) {
    if (resources.size() != effective_priority.size()) {
        throw std::invalid_argument("mutex gate: resource and priority lists differ in length");
    }
    GateDecision d;
    d.children.resize(resources.size());
    d.order.resize(resources.size());
    std::iota(d.order.begin(), d.order.end(), std::size_t{0});
    std::stable_sort(d.order.begin(), d.order.end(), [&](std::size_t a, std::size_t b) {
        return effective_priority[a] > effective_priority[b];
    });
    ResourceSet reserved;
    for (auto i : d.order) {
        if (resources[i].disjoint(reserved)) {
            reserved |= resources[i];
            d.children[i] = {Gate::Ticked, GateReason::None};
        } else {
            d.children[i] = {Gate::Paused, GateReason::ResourceWait};
        }
    }
    return d;
}

ResourceSet granted_resources(const GateDecision& decision, std::span<const ResourceSet> resources) {
    ResourceSet out;
    for (std::size_t i = 0; i < resources.size(); ++i) {
        if (decision.ticked(i)) out |= resources[i];
    }
    return out;
}

GatedTick tick_gated(GateDecision decision, std::span<const std::optional<Status>> retained,
                     const std::function<Status(std::size_t)>& tick_child, std::optional<int> threshold) {
    std::vector<Status> statuses(decision.children.size(), Status::Running);
    for (std::size_t i = 0; i < statuses.size(); ++i) {
        if (i < retained.size() && retained[i]) statuses[i] = *retained[i];
    }
    for (auto i : decision.order) {
        if (decision.ticked(i)) statuses[i] = tick_child(i);
    }
    return {aggregate_parallel(statuses, threshold), std::move(decision)};
}

GatedTick tick_parallel_sync(std::span<const Progress> snapshot, std::span<const std::optional<Status>> retained,
                             const std::function<Status(std::size_t)>& tick_child, std::optional<int> threshold) {
    return tick_gated(gate_parallel_sync(snapshot), retained, tick_child, threshold);
}

GatedTick tick_parallel_mutex(std::span<const ResourceSet> resources, std::span<const int> effective_priority,
                              std::span<const std::optional<Status>> retained,
                              const std::function<Status(std::size_t)>& tick_child) {
    return tick_gated(gate_parallel_mutex(resources, effective_priority), retained, tick_child);
}

Progress compose_progress_sequence(Progress first, Progress second, bool first_succeeded) {
    if (first_succeeded) return Progress(0.5 + second.value() / 2.0);
    return Progress(first.value() / 2.0);
}

Progress compose_progress_fallback(Progress first, Progress second, bool first_failed) {
    return first_failed ? second : first;
}

Composite compose_parallel(std::span<const Progress> progress, std::span<const ResourceSet> resources) {
    if (progress.empty() || progress.size() != resources.size()) {
        throw std::invalid_argument("compose_parallel needs equal-length nonempty lists");
    }
    Composite out{*std::min_element(progress.begin(), progress.end()), {}};
    for (const auto& r : resources) out.resources |= r;
    return out;
}

std::size_t sequence_active_child(std::span<const Status> regions) {
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i] != Status::Success) return i;
    }
    return regions.empty() ? 0 : regions.size() - 1;
}

std::size_t fallback_active_child(std::span<const Status> regions) {
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i] != Status::Failure) return i;
    }
    return regions.empty() ? 0 : regions.size() - 1;
}

Progress sequence_progress(std::span<const Status> regions, std::span<const Progress> progress) {
    const auto j = sequence_active_child(regions);
    const double n = static_cast<double>(progress.size());
    return Progress((static_cast<double>(j) + progress[j].value()) / n);
}

}  // namespace cbt::ops
