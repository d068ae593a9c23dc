#pragma once

// Tick engine: drives the root once per step, routes ticks through the
// operators, dispatches halt/pause to nodes that stop receiving ticks, and
// records everything in a Trace.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cbt/aging.hpp"
#include "cbt/core.hpp"
#include "cbt/operators.hpp"
#include "cbt/trace.hpp"

namespace cbt {

/// Host-provided behavior of an Action leaf.
///
/// `tick` performs one step of computation and returns the resulting status.
/// It must be deterministic and touch nothing but the world: the engine also
/// runs it on world copies to evaluate the status region of a state.
/// `halt` and `pause` must leave progress and resources unchanged.
template <class World>
struct LeafBehavior {
    std::function<Status(World&)> tick;
    std::function<Progress(const World&)> progress;
    std::function<ResourceSet(const World&)> resources;
    std::function<void(World&)> halt;
    std::function<void(World&)> pause;
};

/// Name -> behavior bindings for one scenario.
template <class World>
class BehaviorRegistry {
public:
    using Predicate = std::function<bool(const World&)>;

    void add_action(std::string name, LeafBehavior<World> behavior) {
        if (!behavior.tick || !behavior.progress) {
            throw std::invalid_argument("action '" + name + "' needs tick and progress");
        }
        actions_.insert_or_assign(std::move(name), std::move(behavior));
    }

    void add_condition(std::string name, Predicate predicate) {
        conditions_.insert_or_assign(std::move(name), std::move(predicate));
    }

    const LeafBehavior<World>* action(const std::string& name) const {
        auto it = actions_.find(name);
        return it == actions_.end() ? nullptr : &it->second;
    }

    const Predicate* condition(const std::string& name) const {
        auto it = conditions_.find(name);
        return it == conditions_.end() ? nullptr : &it->second;
    }

    bool binds(const NodeSpec& leaf) const {
        if (leaf.kind == NodeKind::Action) return action(leaf.leaf_ref) != nullptr;
        if (leaf.kind == NodeKind::Condition) return condition(leaf.leaf_ref) != nullptr;
        return false;
    }

private:
    std::map<std::string, LeafBehavior<World>> actions_;
    std::map<std::string, Predicate> conditions_;
};

struct EngineConfig {
    double delta_t = 1.0;  ///< bookkeeping only
    int max_ticks = 1000;
    int halt_latency_budget = 0;  ///< ticks; halts and pauses run inside the step
    PolicyConfig policy;
};

class InvalidTree : public std::invalid_argument {
public:
    explicit InvalidTree(ValidationReport report)
        : std::invalid_argument("tree is not runnable:\n" + report.to_string()), report_(std::move(report)) {}
    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

template <class World>
class Engine {
public:
    using TickHook = std::function<void(World&, int)>;

    Engine(NodeSpec tree, const BehaviorRegistry<World>& registry, const ResourceCatalog& catalog,
           EngineConfig cfg = {})
        : tree_(std::make_unique<NodeSpec>(std::move(tree))),
          registry_(std::make_unique<BehaviorRegistry<World>>(registry)),
          catalog_(catalog),
          cfg_(cfg) {
        if (cfg_.max_ticks < 1) throw std::invalid_argument("max_ticks must be >= 1");
        if (cfg_.halt_latency_budget != 0) {
            throw std::invalid_argument("halt latency is modelled as zero; budget must be 0");
        }
        assign_default_ids(*tree_);
        auto report = validate_tree(*tree_, [&](const NodeSpec& n) { return registry_->binds(n); });
        if (!report.ok()) throw InvalidTree(std::move(report));
        flatten(*tree_, -1, *registry_);
        books_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            books_[i].priority.base = nodes_[i].spec->base_priority.value_or(0);
        }
        trace_.tree = *tree_;
        trace_.delta_t = cfg_.delta_t;
    }

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;
    Engine(Engine&&) noexcept = default;
    Engine& operator=(Engine&&) noexcept = default;

    /// Called at the start of every step with the tick index, before the
    /// root is ticked. Scenario scripts use it for exogenous events.
    void on_tick_start(TickHook hook) { on_tick_start_ = std::move(hook); }

    /// One root-to-leaf traversal.
    Status step(World& world) {
        if (!observed_) observe_initial(world);
        const int k = tick_;
        if (on_tick_start_) on_tick_start_(world, k);
        const Progress p = node_progress(0, world);
        const ResourceSet q = node_resources(0, world);
        const Status s = tick_node(0, world, p, q);
        finish_step(world, k);
        ++tick_;
        trace_.ticks = tick_;
        return s;
    }

    /// Steps until the root stops returning Running or max_ticks is reached.
    Trace run(World& world) {
        while (tick_ < cfg_.max_ticks) {
            const Status s = step(world);
            if (s == Status::Success) return finish(RunResult::Success);
            if (s == Status::Failure) return finish(RunResult::Failure);
        }
        return finish(RunResult::Timeout);
    }

    const Trace& trace() const noexcept { return trace_; }
    int tick_index() const noexcept { return tick_; }
    const EngineConfig& config() const noexcept { return cfg_; }
    const NodeSpec& tree() const noexcept { return *tree_; }

    /// Progress of a node in the given world state.
    Progress progress(std::string_view id, const World& world) const { return node_progress(index_of(id), world); }
    ResourceSet resources(std::string_view id, const World& world) const {
        return node_resources(index_of(id), world);
    }
    /// Status the node would return if ticked from this state (its region).
    Status status_region(std::string_view id, const World& world) const {
        return dry_status(index_of(id), world);
    }

    Priority priority(std::string_view id) const { return books_[index_of(id)].priority; }
    bool holding(std::string_view id) const { return books_[index_of(id)].holding; }
    /// Effective priority used at the last arbitration of a mutex child.
    std::optional<int> last_effective_priority(std::string_view id) const {
        return books_[index_of(id)].last_effective;
    }

private:
    struct Node {
        const NodeSpec* spec = nullptr;
        int parent = -1;
        std::vector<int> children;
        const LeafBehavior<World>* action = nullptr;
        const typename BehaviorRegistry<World>::Predicate* predicate = nullptr;
        int subtree_end = 0;  ///< one past the last preorder index of the subtree
    };

    struct Book {
        std::optional<Status> last_status;
        int last_ticked = -1;
        int last_paused = -1;
        bool active = false;  ///< Running at the end of the previous step, or paused
        Priority priority;
        bool holding = false;
        std::optional<int> last_effective;
        Progress observed_progress;
    };

    std::unique_ptr<NodeSpec> tree_;
    std::unique_ptr<BehaviorRegistry<World>> registry_;
    ResourceCatalog catalog_;
    EngineConfig cfg_;
    std::vector<Node> nodes_;
    std::vector<Book> books_;
    Trace trace_;
    TickHook on_tick_start_;
    int tick_ = 0;
    bool observed_ = false;

    int flatten(const NodeSpec& spec, int parent, const BehaviorRegistry<World>& registry) {
        const int idx = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{&spec, parent, {}, nullptr, nullptr, 0});
        if (spec.kind == NodeKind::Action) nodes_[idx].action = registry.action(spec.leaf_ref);
        if (spec.kind == NodeKind::Condition) nodes_[idx].predicate = registry.condition(spec.leaf_ref);
        for (const auto& c : spec.children) {
            const int ci = flatten(c, idx, registry);
            nodes_[idx].children.push_back(ci);
        }
        nodes_[idx].subtree_end = static_cast<int>(nodes_.size());
        return idx;
    }

    std::size_t index_of(std::string_view id) const {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].spec->id == id) return i;
        }
        throw std::out_of_range("no node with id '" + std::string(id) + "'");
    }

    Trace finish(RunResult r) {
        trace_.result = r;
        trace_.ticks = tick_;
        return trace_;
    }

    void observe_initial(const World& world) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].action) books_[i].observed_progress = nodes_[i].action->progress(world);
        }
        observed_ = true;
    }

    // ---- pure evaluation ------------------------------------------------

    Status leaf_condition(const Node& n, const World& world) const {
        return (*n.predicate)(world) ? Status::Success : Status::Failure;
    }

    Status dry_status(std::size_t i, const World& world) const {
        World copy = world;
        return dry_tick(i, copy);
    }

    Status dry_tick(std::size_t i, World& world) const {
        const Node& n = nodes_[i];
        switch (n.spec->kind) {
        case NodeKind::Action: return n.action->tick(world);
        case NodeKind::Condition: return leaf_condition(n, world);
        case NodeKind::Sequence:
            return ops::tick_sequence(n.children.size(), [&](std::size_t c) {
                       return dry_tick(n.children[c], world);
                   }).status;
        case NodeKind::Fallback:
            return ops::tick_fallback(n.children.size(), [&](std::size_t c) {
                       return dry_tick(n.children[c], world);
                   }).status;
        case NodeKind::Parallel:
        case NodeKind::ParallelSync:
        case NodeKind::ParallelMutex: {
            const auto decision = gate(i, world);
            auto statuses = retained(i);
            for (auto c : decision.order) {
                if (decision.ticked(c)) statuses[c] = dry_tick(n.children[c], world);
            }
            return ops::aggregate_parallel(statuses, n.spec->success_threshold);
        }
        }
        return Status::Failure;
    }

    std::size_t deciding_child(std::size_t i, const World& world) const {
        const Node& n = nodes_[i];
        const Status stop_unless = n.spec->kind == NodeKind::Sequence ? Status::Success : Status::Failure;
        for (std::size_t c = 0; c < n.children.size(); ++c) {
            if (dry_status(n.children[c], world) != stop_unless) return c;
        }
        return n.children.size() - 1;
    }

    Progress node_progress(std::size_t i, const World& world) const {
        const Node& n = nodes_[i];
        switch (n.spec->kind) {
        case NodeKind::Action: return n.action->progress(world);
        case NodeKind::Condition: return Progress(1.0);
        case NodeKind::Sequence: {
            const auto j = deciding_child(i, world);
            const double count = static_cast<double>(n.children.size());
            return Progress((static_cast<double>(j) + node_progress(n.children[j], world).value()) / count);
        }
        case NodeKind::Fallback: return node_progress(n.children[deciding_child(i, world)], world);
        case NodeKind::Parallel:
        case NodeKind::ParallelSync:
        case NodeKind::ParallelMutex: {
            Progress lowest(1.0);
            for (int c : n.children) lowest = std::min(lowest, node_progress(c, world));
            return lowest;
        }
        }
        return Progress(0.0);
    }

    ResourceSet node_resources(std::size_t i, const World& world) const {
        const Node& n = nodes_[i];
        switch (n.spec->kind) {
        case NodeKind::Action: return n.action->resources ? n.action->resources(world) : ResourceSet{};
        case NodeKind::Condition: return {};
        case NodeKind::Sequence:
        case NodeKind::Fallback: return node_resources(n.children[deciding_child(i, world)], world);
        case NodeKind::Parallel:
        case NodeKind::ParallelSync: {
            ResourceSet all;
            for (int c : n.children) all |= node_resources(c, world);
            return all;
        }
        case NodeKind::ParallelMutex: {
            std::vector<ResourceSet> q;
            for (int c : n.children) q.push_back(node_resources(c, world));
            return ops::granted_resources(ops::gate_parallel_mutex(q, effective_priorities(i)), q);
        }
        }
        return {};
    }

    std::vector<int> effective_priorities(std::size_t i) const {
        std::vector<int> eff;
        for (int c : nodes_[i].children) {
            eff.push_back(effective_priority(books_[c].priority, books_[c].holding, cfg_.policy));
        }
        return eff;
    }

    ops::GateDecision gate(std::size_t i, const World& world) const {
        const Node& n = nodes_[i];
        std::vector<Progress> p;
        std::vector<ResourceSet> q;
        switch (n.spec->kind) {
        case NodeKind::ParallelSync:
            for (int c : n.children) p.push_back(node_progress(c, world));
            return ops::gate_parallel_sync(p);
        case NodeKind::ParallelMutex:
            for (int c : n.children) q.push_back(node_resources(c, world));
            return ops::gate_parallel_mutex(q, effective_priorities(i));
        default: {
            ops::GateDecision all;
            for (std::size_t c = 0; c < n.children.size(); ++c) {
                all.children.push_back({ops::Gate::Ticked, ops::GateReason::None});
                all.order.push_back(c);
            }
            return all;
        }
        }
    }

    std::vector<Status> retained(std::size_t i) const {
        std::vector<Status> out;
        for (int c : nodes_[i].children) out.push_back(books_[c].last_status.value_or(Status::Running));
        return out;
    }

    // ---- ticking --------------------------------------------------------

    std::size_t emit(std::size_t i, EventKind kind, Progress p, const ResourceSet& q) {
        trace_.events.push_back(TraceEvent{tick_, nodes_[i].spec->id, kind, std::nullopt, p.value(), catalog_.names(q)});
        return trace_.events.size() - 1;
    }

    Status tick_child(std::size_t i, World& world) {
        return tick_node(i, world, node_progress(i, world), node_resources(i, world));
    }

    Status tick_node(std::size_t i, World& world, Progress p, const ResourceSet& q) {
        const Node& n = nodes_[i];
        const std::size_t ev = emit(i, EventKind::Ticked, p, q);
        books_[i].last_ticked = tick_;
        Status s = Status::Failure;
        switch (n.spec->kind) {
        case NodeKind::Action: s = n.action->tick(world); break;
        case NodeKind::Condition: s = leaf_condition(n, world); break;
        case NodeKind::Sequence:
            s = ops::tick_sequence(n.children.size(), [&](std::size_t c) {
                    return tick_child(n.children[c], world);
                }).status;
            break;
        case NodeKind::Fallback:
            s = ops::tick_fallback(n.children.size(), [&](std::size_t c) {
                    return tick_child(n.children[c], world);
                }).status;
            break;
        case NodeKind::Parallel:
        case NodeKind::ParallelSync:
        case NodeKind::ParallelMutex: s = tick_parallel(i, world); break;
        }
        trace_.events[ev].status = s;
        books_[i].last_status = s;
        return s;
    }

    Status tick_parallel(std::size_t i, World& world) {
        const Node& n = nodes_[i];
        const bool mutex = n.spec->kind == NodeKind::ParallelMutex;
        std::vector<Progress> p;
        std::vector<ResourceSet> q;
        for (int c : n.children) {
            p.push_back(node_progress(c, world));
            q.push_back(node_resources(c, world));
        }
        std::vector<int> eff;
        ops::GateDecision decision;
        if (mutex) {
            eff = effective_priorities(i);
            decision = ops::gate_parallel_mutex(q, eff);
        } else if (n.spec->kind == NodeKind::ParallelSync) {
            decision = ops::gate_parallel_sync(p);
        } else {
            decision = gate(i, world);
        }

        auto statuses = retained(i);
        for (auto c : decision.order) {
            const auto child = static_cast<std::size_t>(n.children[c]);
            if (decision.ticked(c)) {
                statuses[c] = tick_node(child, world, p[c], q[c]);
            } else {
                const bool running = statuses[c] == Status::Running;
                if (mutex || running) pause_branch(child, world, p[c], q[c]);
            }
        }

        if (mutex) {
            for (std::size_t c = 0; c < n.children.size(); ++c) {
                Book& b = books_[n.children[c]];
                const bool requesting = !q[c].empty();
                const bool granted = decision.ticked(c);
                const auto outcome = !requesting ? Arbitration::NotRequesting
                                     : granted   ? Arbitration::Granted
                                                 : Arbitration::Denied;
                b.last_effective = eff[c];
                b.priority = update_after_tick(b.priority, outcome);
                b.holding = granted && requesting && statuses[c] == Status::Running;
            }
        }
        return ops::aggregate_parallel(statuses, n.spec->success_threshold);
    }

    /// Pauses a withheld child and every node below it that was active.
    void pause_branch(std::size_t i, World& world, Progress p, const ResourceSet& q) {
        emit(i, EventKind::Paused, p, q);
        books_[i].last_paused = tick_;
        if (nodes_[i].action && nodes_[i].action->pause) nodes_[i].action->pause(world);
        for (int d = static_cast<int>(i) + 1; d < nodes_[i].subtree_end; ++d) {
            if (!books_[d].active) continue;
            emit(d, EventKind::Paused, node_progress(d, world), node_resources(d, world));
            books_[d].last_paused = tick_;
            if (nodes_[d].action && nodes_[d].action->pause) nodes_[d].action->pause(world);
        }
    }

    void finish_step(World& world, int k) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            Book& b = books_[i];
            if (b.active && b.last_ticked != k && b.last_paused != k) {
                emit(i, EventKind::Halted, node_progress(i, world), node_resources(i, world));
                if (nodes_[i].action && nodes_[i].action->halt) nodes_[i].action->halt(world);
            }
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            Book& b = books_[i];
            b.active = (b.last_ticked == k && b.last_status == Status::Running) || b.last_paused == k;
            if (nodes_[i].spec->kind == NodeKind::ParallelMutex && b.last_ticked != k) {
                for (int c : nodes_[i].children) books_[c].holding = false;
            }
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!nodes_[i].action) continue;
            Book& b = books_[i];
            const Progress now = nodes_[i].action->progress(world);
            if (b.last_ticked != k && now != b.observed_progress) {
                throw ContractViolation("leaf '" + nodes_[i].spec->id + "' changed progress from " +
                                        std::to_string(b.observed_progress.value()) + " to " +
                                        std::to_string(now.value()) + " at tick " + std::to_string(k) +
                                        " without being ticked");
            }
            b.observed_progress = now;
        }
    }
};

}  // namespace cbt
