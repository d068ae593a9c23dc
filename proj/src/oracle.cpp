#include "cbt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cbt/engine.hpp"

namespace cbt::oracle {

int FiniteWorld::state_count() const {
    int n = 1;
    for (int s : var_sizes) n *= s;
    return n;
}

int FiniteWorld::get(int state, int var) const {
    for (int v = 0; v < var; ++v) state /= var_sizes[v];
    return state % var_sizes[var];
}

int FiniteWorld::set(int state, int var, int value) const {
    int stride = 1;
    for (int v = 0; v < var; ++v) stride *= var_sizes[v];
    return state + (value - get(state, var)) * stride;
}

Memory Memory::initial(const NodeSpec& root) {
    Memory m;
    for_each_node(root, [&](const NodeSpec& n) {
        if (n.kind != NodeKind::ParallelMutex) return;
        for (const auto& c : n.children) {
            m.priority[c.id] = Priority{c.base_priority.value_or(0), 0};
            m.holding[c.id] = false;
        }
    });
    return m;
}

RegionPartition classify_regions(const std::vector<Status>& status) {
    RegionPartition out;
    for (int x = 0; x < static_cast<int>(status.size()); ++x) {
        switch (status[x]) {
        case Status::Success: out.success_region.push_back(x); break;
        case Status::Failure: out.failure_region.push_back(x); break;
        case Status::Running: out.running_region.push_back(x); break;
        }
    }
    return out;
}

std::set<int> footprint(const NodeSpec& node, const FiniteWorld& world) {
    std::set<int> out;
    for_each_node(node, [&](const NodeSpec& n) {
        if (!is_leaf(n.kind)) return;
        const auto& fp = world.leaves.at(n.leaf_ref).footprint;
        out.insert(fp.begin(), fp.end());
    });
    return out;
}

namespace {

Status aggregate(const std::vector<Status>& statuses, std::optional<int> threshold) {
    const int n = static_cast<int>(statuses.size());
    const int need = threshold.value_or(n);
    const auto succeeded = std::count(statuses.begin(), statuses.end(), Status::Success);
    const auto failed = std::count(statuses.begin(), statuses.end(), Status::Failure);
    if (succeeded >= need) return Status::Success;
    if (failed > n - need) return Status::Failure;
    return Status::Running;
}

// Copies the variables in `vars` from `from` into `into`.
int overlay(const FiniteWorld& world, int into, int from, const std::set<int>& vars) {
    for (int v : vars) into = world.set(into, v, world.get(from, v));
    return into;
}

class Composer {
public:
    Composer(const FiniteWorld& world, const Memory& memory, const PolicyConfig& policy)
        : world_(world), memory_(memory), policy_(policy), states_(world.state_count()) {}

    const ComposedMaps& of(const NodeSpec& node) {
        auto it = cache_.find(&node);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(&node, build(node)).first->second;
    }

    Status retained(const std::string& id) const {
        auto it = memory_.retained.find(id);
        return it == memory_.retained.end() ? Status::Running : it->second;
    }

    int effective(const std::string& id) const {
        return effective_priority(memory_.priority.at(id), memory_.holding.at(id), policy_);
    }

    /// Barrier: children at the minimum progress.
    std::vector<bool> sync_gate(const NodeSpec& node, int x) {
        double lowest = 1.0;
        for (const auto& c : node.children) lowest = std::min(lowest, of(c).progress[x]);
        std::vector<bool> ticked;
        for (const auto& c : node.children) ticked.push_back(of(c).progress[x] <= lowest);
        return ticked;
    }

    /// Semaphore: visit by descending effective priority, grant when disjoint.
    std::vector<std::size_t> mutex_order(const NodeSpec& node) const {
        std::vector<std::size_t> order(node.children.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return effective(node.children[a].id) > effective(node.children[b].id);
        });
        return order;
    }

    std::vector<bool> mutex_gate(const NodeSpec& node, int x, const std::vector<std::size_t>& order) {
        std::vector<bool> granted(node.children.size(), false);
        ResourceSet taken;
        for (auto i : order) {
            const auto& q = of(node.children[i]).resources[x];
            if (q.disjoint(taken)) {
                granted[i] = true;
                taken |= q;
            }
        }
        return granted;
    }

private:
    const FiniteWorld& world_;
    const Memory& memory_;
    PolicyConfig policy_;
    int states_;
    std::map<const NodeSpec*, ComposedMaps> cache_;

    ComposedMaps blank() const {
        ComposedMaps m;
        m.transition.resize(states_);
        m.status.resize(states_);
        m.progress.resize(states_);
        m.resources.resize(states_);
        return m;
    }

    ComposedMaps build(const NodeSpec& node) {
        switch (node.kind) {
        case NodeKind::Action:
        case NodeKind::Condition: return leaf(node);
        case NodeKind::Sequence: return chain(node, Status::Success);
        case NodeKind::Fallback: return chain(node, Status::Failure);
        case NodeKind::Parallel:
        case NodeKind::ParallelSync: return product(node);
        case NodeKind::ParallelMutex: return semaphore(node);
        }
        throw StructuralError("unknown node kind");
    }

    ComposedMaps leaf(const NodeSpec& node) {
        const auto it = world_.leaves.find(node.leaf_ref);
        if (it == world_.leaves.end()) throw StructuralError("no tables for leaf '" + node.leaf_ref + "'");
        const FiniteLeaf& l = it->second;
        if ((node.kind == NodeKind::Condition) != l.condition) {
            throw StructuralError("leaf '" + node.leaf_ref + "' bound with the wrong kind");
        }
        ComposedMaps m = blank();
        for (int x = 0; x < states_; ++x) {
            m.status[x] = l.status[x];
            if (l.condition) {
                m.transition[x] = x;
                m.progress[x] = 1.0;
            } else {
                m.transition[x] = l.transition[x];
                m.progress[x] = l.progress[x];
                m.resources[x] = l.resources[x];
            }
        }
        return m;
    }

    // Sequence (pass = Success) and Fallback (pass = Failure). A passing
    // child hands the state it produced to the next one.
    ComposedMaps chain(const NodeSpec& node, Status pass) {
        ComposedMaps m = blank();
        const std::size_t n = node.children.size();
        for (int x = 0; x < states_; ++x) {
            int y = x;
            for (std::size_t j = 0; j < n; ++j) {
                const auto& c = of(node.children[j]);
                const Status s = c.status[y];
                const int next = c.transition[y];
                if (s != pass || j + 1 == n) {
                    m.status[x] = s;
                    m.transition[x] = next;
                    break;
                }
                y = next;
            }
            std::size_t deciding = n - 1;
            for (std::size_t j = 0; j < n; ++j) {
                if (of(node.children[j]).status[x] != pass) {
                    deciding = j;
                    break;
                }
            }
            const auto& d = of(node.children[deciding]);
            m.progress[x] = pass == Status::Success
                                ? (static_cast<double>(deciding) + d.progress[x]) / static_cast<double>(n)
                                : d.progress[x];
            m.resources[x] = d.resources[x];
        }
        return m;
    }

    ComposedMaps product(const NodeSpec& node) {
        std::vector<std::set<int>> fps;
        for (const auto& c : node.children) {
            auto fp = footprint(c, world_);
            for (const auto& other : fps) {
                for (int v : fp) {
                    if (other.contains(v)) {
                        throw StructuralError("children of '" + node.id + "' share variable " + std::to_string(v));
                    }
                }
            }
            fps.push_back(std::move(fp));
        }
        const bool sync = node.kind == NodeKind::ParallelSync;
        ComposedMaps m = blank();
        for (int x = 0; x < states_; ++x) {
            const auto ticked = sync ? sync_gate(node, x) : std::vector<bool>(node.children.size(), true);
            int y = x;
            std::vector<Status> statuses;
            double lowest = 1.0;
            ResourceSet all;
            for (std::size_t i = 0; i < node.children.size(); ++i) {
                const auto& c = of(node.children[i]);
                if (ticked[i]) {
                    y = overlay(world_, y, c.transition[x], fps[i]);
                    statuses.push_back(c.status[x]);
                } else {
                    statuses.push_back(retained(node.children[i].id));
                }
                lowest = std::min(lowest, c.progress[x]);
                all |= c.resources[x];
            }
            m.transition[x] = y;
            m.status[x] = aggregate(statuses, node.success_threshold);
            m.progress[x] = lowest;
            m.resources[x] = all;
        }
        return m;
    }

    ComposedMaps semaphore(const NodeSpec& node) {
        ComposedMaps m = blank();
        const auto order = mutex_order(node);
        for (int x = 0; x < states_; ++x) {
            const auto granted = mutex_gate(node, x, order);
            std::vector<Status> statuses;
            for (const auto& c : node.children) statuses.push_back(retained(c.id));
            int y = x;
            double lowest = 1.0;
            ResourceSet held;
            for (auto i : order) {
                if (!granted[i]) continue;
                const auto& c = of(node.children[i]);
                statuses[i] = c.status[y];
                y = c.transition[y];
                held |= c.resources[x];
            }
            for (const auto& c : node.children) lowest = std::min(lowest, of(c).progress[x]);
            m.transition[x] = y;
            m.status[x] = aggregate(statuses, node.success_threshold);
            m.progress[x] = lowest;
            m.resources[x] = held;
        }
        return m;
    }
};

class Walker {
public:
    Walker(Composer& comp, const Memory& before, const PolicyConfig& policy)
        : comp_(comp), before_(before), after_(before), policy_(policy) {}

    void walk(const NodeSpec& node, int y) {
        switch (node.kind) {
        case NodeKind::Action:
        case NodeKind::Condition: return;
        case NodeKind::Sequence:
        case NodeKind::Fallback: {
            const Status pass = node.kind == NodeKind::Sequence ? Status::Success : Status::Failure;
            for (const auto& c : node.children) {
                walk(c, y);
                const auto& m = comp_.of(c);
                if (m.status[y] != pass) return;
                y = m.transition[y];
            }
            return;
        }
        case NodeKind::Parallel:
        case NodeKind::ParallelSync: {
            const auto ticked = node.kind == NodeKind::ParallelSync
                                    ? comp_.sync_gate(node, y)
                                    : std::vector<bool>(node.children.size(), true);
            for (std::size_t i = 0; i < node.children.size(); ++i) {
                if (!ticked[i]) continue;
                walk(node.children[i], y);
                after_.retained[node.children[i].id] = comp_.of(node.children[i]).status[y];
            }
            return;
        }
        case NodeKind::ParallelMutex: {
            mutexes_ticked_.insert(&node);
            const auto order = comp_.mutex_order(node);
            const auto granted = comp_.mutex_gate(node, y, order);
            std::vector<Status> statuses(node.children.size(), Status::Running);
            int cur = y;
            for (auto i : order) {
                if (!granted[i]) continue;
                const auto& c = node.children[i];
                walk(c, cur);
                statuses[i] = comp_.of(c).status[cur];
                after_.retained[c.id] = statuses[i];
                cur = comp_.of(c).transition[cur];
            }
            for (std::size_t i = 0; i < node.children.size(); ++i) {
                const auto& id = node.children[i].id;
                const bool requesting = !comp_.of(node.children[i]).resources[y].empty();
                Priority p = before_.priority.at(id);
                if (requesting) p.wait_ticks = granted[i] ? 0 : p.wait_ticks + 1;
                after_.priority[id] = p;
                after_.holding[id] = granted[i] && requesting && statuses[i] == Status::Running;
            }
            return;
        }
        }
    }

    Memory finish(const NodeSpec& root) {
        for_each_node(root, [&](const NodeSpec& n) {
            if (n.kind != NodeKind::ParallelMutex || mutexes_ticked_.contains(&n)) return;
            for (const auto& c : n.children) after_.holding[c.id] = false;
        });
        return after_;
    }

private:
    Composer& comp_;
    const Memory& before_;
    Memory after_;
    PolicyConfig policy_;
    std::set<const NodeSpec*> mutexes_ticked_;
};

}  // namespace

ComposedMaps compose(const NodeSpec& node, const FiniteWorld& world, const Memory& memory,
                     const PolicyConfig& policy) {
    Composer comp(world, memory, policy);
    return comp.of(node);
}

Memory advance(const NodeSpec& root, const FiniteWorld& world, const Memory& memory, int state,
               const PolicyConfig& policy) {
    Composer comp(world, memory, policy);
    Walker walker(comp, memory, policy);
    walker.walk(root, state);
    return walker.finish(root);
}

std::vector<std::string> audit_footprints(const FiniteWorld& world) {
    std::vector<std::string> offenders;
    const int n = world.state_count();
    for (const auto& [name, leaf] : world.leaves) {
        // Canonical representative: every variable outside the footprint at 0.
        auto canon = [&](int x) {
            for (int v = 0; v < static_cast<int>(world.var_sizes.size()); ++v) {
                if (!leaf.footprint.contains(v)) x = world.set(x, v, 0);
            }
            return x;
        };
        bool ok = true;
        for (int x = 0; x < n && ok; ++x) {
            const int r = canon(x);
            const int fx = leaf.condition ? x : leaf.transition[x];
            for (int v = 0; v < static_cast<int>(world.var_sizes.size()); ++v) {
                if (!leaf.footprint.contains(v) && world.get(fx, v) != world.get(x, v)) ok = false;
            }
            if (leaf.status[x] != leaf.status[r]) ok = false;
            if (!leaf.condition) {
                if (leaf.progress[x] != leaf.progress[r] || !(leaf.resources[x] == leaf.resources[r])) ok = false;
                if (canon(leaf.transition[x]) != canon(leaf.transition[r])) ok = false;
            }
        }
        if (!ok) offenders.push_back(name);
    }
    return offenders;
}

namespace {

struct FiniteState {
    const FiniteWorld* world = nullptr;
    int state = 0;
};

BehaviorRegistry<FiniteState> finite_registry(const FiniteWorld& world) {
    BehaviorRegistry<FiniteState> reg;
    for (const auto& [name, leaf] : world.leaves) {
        const FiniteLeaf* l = &leaf;
        if (leaf.condition) {
            reg.add_condition(name, [l](const FiniteState& s) { return l->status[s.state] == Status::Success; });
            continue;
        }
        LeafBehavior<FiniteState> b;
        b.tick = [l](FiniteState& s) {
            const Status r = l->status[s.state];
            s.state = l->transition[s.state];
            return r;
        };
        b.progress = [l](const FiniteState& s) { return Progress(l->progress[s.state]); };
        b.resources = [l](const FiniteState& s) { return l->resources[s.state]; };
        reg.add_action(name, std::move(b));
    }
    return reg;
}

}  // namespace

EquivalenceReport check_equivalence(const NodeSpec& tree, const FiniteWorld& world, int start_state, int horizon,
                                    const PolicyConfig& policy) {
    EquivalenceReport report;
    const auto registry = finite_registry(world);
    EngineConfig cfg;
    cfg.max_ticks = std::max(1, horizon);
    cfg.policy = policy;
    Engine<FiniteState> engine(tree, registry, world.catalog, cfg);
    const NodeSpec& root = engine.tree();

    FiniteState live{&world, start_state};
    Memory memory = Memory::initial(root);
    int x = start_state;
    report.engine_states.push_back(live.state);
    report.oracle_states.push_back(x);

    auto diverge = [&](int k, const std::string& what) {
        report.equal = false;
        report.first_divergence = k;
        report.detail = what;
    };

    for (int k = 0; k < horizon; ++k) {
        Composer comp(world, memory, policy);
        const ComposedMaps& composed = comp.of(root);
        const double engine_progress = engine.progress(root.id, live).value();
        const Status engine_status = engine.step(live);

        Walker walker(comp, memory, policy);
        walker.walk(root, x);
        memory = walker.finish(root);
        const Status oracle_status = composed.status[x];
        const double oracle_progress = composed.progress[x];
        x = composed.transition[x];

        report.engine_states.push_back(live.state);
        report.oracle_states.push_back(x);
        std::ostringstream what;
        if (live.state != x) {
            what << "state " << live.state << " vs composed " << x;
        } else if (engine_status != oracle_status) {
            what << "root status " << to_string(engine_status) << " vs composed " << to_string(oracle_status);
        } else if (std::abs(engine_progress - oracle_progress) > 1e-12) {
            what << "root progress " << engine_progress << " vs composed " << oracle_progress;
        }
        if (!what.str().empty()) {
            diverge(k, what.str());
            break;
        }
    }
    return report;
}

namespace {

class CaseGenerator {
public:
    explicit CaseGenerator(std::uint64_t seed) : rng_(seed) {}

    FuzzCase make() {
        static const std::vector<std::vector<int>> layouts = {{2, 2, 2, 2}, {2, 2, 4}, {4, 4}, {2, 8}};
        FuzzCase fc;
        fc.world.var_sizes = layouts[pick(layouts.size())];
        fc.world.catalog.intern("r0");
        fc.world.catalog.intern("r1");
        world_ = &fc.world;
        std::vector<int> vars(fc.world.var_sizes.size());
        std::iota(vars.begin(), vars.end(), 0);
        int budget = 7;
        fc.tree = node(3, vars, budget);
        assign_default_ids(fc.tree);
        fc.start_state = chance(0.5) ? 0 : static_cast<int>(pick(static_cast<std::size_t>(fc.world.state_count())));
        return fc;
    }

private:
    std::mt19937_64 rng_;
    FiniteWorld* world_ = nullptr;
    std::set<int> claimed_;
    int leaf_counter_ = 0;

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

    Status random_status(bool allow_running) {
        const auto r = pick(allow_running ? 3 : 2);
        return r == 0 ? Status::Success : r == 1 ? Status::Failure : Status::Running;
    }

    NodeSpec node(int depth_left, const std::vector<int>& vars, int& budget) {
        const bool root = budget == 7;
        if (depth_left <= 1 || budget < 2 || (!root && chance(0.3))) return leaf(vars, budget);
        --budget;
        static const NodeKind kinds[] = {NodeKind::Sequence, NodeKind::Fallback, NodeKind::Parallel,
                                         NodeKind::ParallelSync, NodeKind::ParallelMutex};
        const NodeKind kind = kinds[pick(5)];
        const int n = 1 + static_cast<int>(pick(static_cast<std::size_t>(std::min(3, budget))));

        std::vector<std::vector<int>> shares(static_cast<std::size_t>(n));
        if (kind == NodeKind::Parallel || kind == NodeKind::ParallelSync) {
            std::vector<int> order = vars;
            std::shuffle(order.begin(), order.end(), rng_);
            for (std::size_t k = 0; k < order.size(); ++k) {
                // Every child gets a variable while they last; the rest are scattered or left out.
                const auto slot = k < shares.size() ? k : pick(shares.size() + 1);
                if (slot < shares.size()) shares[slot].push_back(order[k]);
            }
        } else {
            for (auto& s : shares) s = vars;
        }

        NodeSpec out;
        out.kind = kind;
        for (int i = 0; i < n; ++i) {
            int child_budget = budget - (n - i - 1);
            const int before = child_budget;
            NodeSpec child = node(depth_left - 1, shares[static_cast<std::size_t>(i)], child_budget);
            budget -= before - child_budget;
            if (kind == NodeKind::ParallelMutex && chance(0.7)) child.base_priority = static_cast<int>(pick(4));
            out.children.push_back(std::move(child));
        }
        if ((kind == NodeKind::Parallel || kind == NodeKind::ParallelSync) && chance(0.5)) {
            out.success_threshold = 1 + static_cast<int>(pick(static_cast<std::size_t>(n)));
        }
        return out;
    }

    NodeSpec leaf(const std::vector<int>& vars, int& budget) {
        --budget;
        const int states = world_->state_count();
        FiniteLeaf l;
        l.transition.resize(states);
        l.status.resize(states);
        l.progress.resize(states);
        l.resources.resize(states);
        const bool is_condition = chance(0.4);
        const std::string name = (is_condition ? "C" : "A") + std::to_string(leaf_counter_++);
        const ResourceId r0 = *world_->catalog.find("r0");
        const ResourceId r1 = *world_->catalog.find("r1");
        auto random_resources = [&] {
            ResourceSet q;
            if (chance(0.5)) q.insert(r0);
            if (chance(0.4)) q.insert(r1);
            return q;
        };

        if (is_condition) {
            l.condition = true;
            if (vars.empty()) {
                const Status s = random_status(false);
                std::fill(l.status.begin(), l.status.end(), s);
            } else {
                const int v = vars[pick(vars.size())];
                l.footprint.insert(v);
                std::vector<Status> by_value;
                for (int u = 0; u < world_->var_sizes[v]; ++u) by_value.push_back(random_status(false));
                for (int x = 0; x < states; ++x) l.status[x] = by_value[world_->get(x, v)];
            }
            for (int x = 0; x < states; ++x) {
                l.transition[x] = x;
                l.progress[x] = 1.0;
            }
        } else {
            std::vector<int> free;
            for (int v : vars) {
                if (!claimed_.contains(v)) free.push_back(v);
            }
            if (free.empty()) {
                const Status s = random_status(true);
                const double p = s == Status::Success ? 1.0 : 0.5 * static_cast<double>(pick(2));
                const ResourceSet q = s == Status::Running ? random_resources() : ResourceSet{};
                for (int x = 0; x < states; ++x) {
                    l.transition[x] = x;
                    l.status[x] = s;
                    l.progress[x] = p;
                    l.resources[x] = q;
                }
            } else {
                const int v = free[pick(free.size())];
                claimed_.insert(v);
                l.footprint.insert(v);
                const int d = world_->var_sizes[v];
                std::vector<Status> status(d);
                std::vector<int> next(d);
                std::vector<ResourceSet> q(d);
                for (int u = 0; u < d; ++u) {
                    status[u] = u == d - 1 ? Status::Success : chance(0.9) ? Status::Running : Status::Failure;
                    if (status[u] != Status::Running) {
                        next[u] = u;
                    } else {
                        next[u] = chance(0.7) ? u + 1 : static_cast<int>(pick(static_cast<std::size_t>(d)));
                    }
                    if (status[u] == Status::Running) q[u] = random_resources();
                }
                for (int x = 0; x < states; ++x) {
                    const int u = world_->get(x, v);
                    l.status[x] = status[u];
                    l.transition[x] = world_->set(x, v, next[u]);
                    l.progress[x] = static_cast<double>(u) / static_cast<double>(d - 1);
                    l.resources[x] = q[u];
                }
            }
        }
        world_->leaves.emplace(name, std::move(l));
        return is_condition ? condition(name) : action(name);
    }
};

}  // namespace

FuzzCase random_case(std::uint64_t seed) { return CaseGenerator(seed).make(); }

}  // namespace cbt::oracle
