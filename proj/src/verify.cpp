#include "cbt/verify.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cbt {

namespace {

// Events of one tick keyed by node id. A node has at most one event per tick.
using TickEvents = std::map<std::string, const TraceEvent*, std::less<>>;

std::vector<TickEvents> by_tick(const Trace& trace, const TreeIndex& index) {
    int ticks = trace.ticks;
    for (const auto& e : trace.events) ticks = std::max(ticks, e.tick + 1);
    std::vector<TickEvents> out(static_cast<std::size_t>(ticks));
    for (const auto& e : trace.events) {
        if (!index.find(e.node)) throw TraceFormatError("event for unknown node '" + e.node + "'");
        auto& slot = out[static_cast<std::size_t>(e.tick)];
        if (!slot.emplace(e.node, &e).second) {
            throw TraceFormatError("node '" + e.node + "' has two events at tick " + std::to_string(e.tick));
        }
    }
    return out;
}

const TraceEvent* event_of(const TickEvents& tick, const std::string& node, EventKind kind) {
    auto it = tick.find(node);
    return it != tick.end() && it->second->event == kind ? it->second : nullptr;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<const NodeSpec*> nodes_of(const TreeIndex& index, std::initializer_list<NodeKind> kinds) {
    std::vector<const NodeSpec*> out;
    for (const auto& entry : index.nodes) {
        if (std::find(kinds.begin(), kinds.end(), entry.node->kind) != kinds.end()) out.push_back(entry.node);
    }
    return out;
}

}  // namespace

void VerdictReport::merge(const VerdictReport& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

std::string VerdictReport::to_json() const {
    nlohmann::json j;
    j["pass"] = pass();
    j["violations"] = nlohmann::json::array();
    for (const auto& v : violations) {
        j["violations"].push_back({{"property", v.property}, {"tick", v.tick}, {"node", v.node}, {"detail", v.detail}});
    }
    return j.dump();
}

VerdictReport verify_barrier(const Trace& trace) {
    const TreeIndex index(trace.tree);
    const auto ticks = by_tick(trace, index);
    VerdictReport report;
    const auto gates = nodes_of(index, {NodeKind::Parallel, NodeKind::ParallelSync});
    for (std::size_t k = 0; k < ticks.size(); ++k) {
        for (const NodeSpec* node : gates) {
            if (!event_of(ticks[k], node->id, EventKind::Ticked)) continue;
            std::vector<const TraceEvent*> dispatched;
            for (const auto& c : node->children) {
                auto it = ticks[k].find(c.id);
                if (it != ticks[k].end() && it->second->event != EventKind::Halted) dispatched.push_back(it->second);
            }
            if (dispatched.empty()) continue;
            double lowest = 1.0;
            for (const auto* e : dispatched) lowest = std::min(lowest, e->progress);
            for (const auto* e : dispatched) {
                const int tick = static_cast<int>(k);
                if (e->event == EventKind::Ticked && e->progress != lowest) {
                    report.violations.push_back({"barrier", tick, e->node,
                                                 "ticked at progress " + fmt(e->progress) + " while the minimum under " +
                                                     node->id + " was " + fmt(lowest)});
                } else if (e->event == EventKind::Paused && e->progress <= lowest) {
                    report.violations.push_back({"barrier", tick, e->node,
                                                 "paused at the minimum progress " + fmt(lowest)});
                }
            }
        }
    }
    return report;
}

VerdictReport verify_mutex(const Trace& trace) {
    const TreeIndex index(trace.tree);
    const auto ticks = by_tick(trace, index);
    VerdictReport report;
    const auto mutexes = nodes_of(index, {NodeKind::ParallelMutex});
    for (std::size_t k = 0; k < ticks.size(); ++k) {
        for (const NodeSpec* node : mutexes) {
            std::map<std::string, std::string> owner;  // resource -> child that took it
            for (const auto& c : node->children) {
                const auto* e = event_of(ticks[k], c.id, EventKind::Ticked);
                if (!e) continue;
                for (const auto& r : e->resources) {
                    auto [it, fresh] = owner.emplace(r, c.id);
                    if (!fresh) {
                        report.violations.push_back({"mutex", static_cast<int>(k), c.id,
                                                     "'" + r + "' already granted to " + it->second});
                    }
                }
            }
        }
    }
    return report;
}

int max_consecutive_pauses(const Trace& trace, const std::string& node) {
    int best = 0;
    int run = 0;
    int last_tick = -2;
    for (const auto& e : trace.events) {
        if (e.node != node || e.event != EventKind::Paused) continue;
        run = e.tick == last_tick + 1 ? run + 1 : 1;
        last_tick = e.tick;
        best = std::max(best, run);
    }
    return best;
}

VerdictReport verify_liveness(const Trace& trace, int bound) {
    if (bound < 1) throw std::invalid_argument("liveness bound must be >= 1");
    const TreeIndex index(trace.tree);
    const auto ticks = by_tick(trace, index);
    VerdictReport report;

    if (!trace.result || *trace.result == RunResult::Timeout) {
        std::map<std::string, double> seen;
        int stalled_since = 0;
        bool reported = false;
        for (std::size_t k = 0; k < ticks.size(); ++k) {
            bool advanced = false;
            for (const auto& [node, e] : ticks[k]) {
                auto it = seen.find(node);
                if (it != seen.end() && e->progress > it->second) advanced = true;
                seen[node] = e->progress;
            }
            if (advanced) {
                stalled_since = static_cast<int>(k) + 1;
                reported = false;
            } else if (!reported && static_cast<int>(k) + 1 - stalled_since >= bound) {
                report.violations.push_back({"deadlock", stalled_since, trace.tree.id,
                                             "no progress increase for " + std::to_string(bound) + " ticks"});
                reported = true;
            }
        }
    }

    for (const NodeSpec* node : nodes_of(index, {NodeKind::ParallelMutex})) {
        for (const auto& c : node->children) {
            int run = 0;
            for (std::size_t k = 0; k < ticks.size(); ++k) {
                run = event_of(ticks[k], c.id, EventKind::Paused) ? run + 1 : 0;
                if (run == bound + 1) {
                    report.violations.push_back({"starvation", static_cast<int>(k), c.id,
                                                 "paused for more than " + std::to_string(bound) + " ticks"});
                }
            }
        }
    }
    return report;
}

std::vector<BarrierEpisode> barrier_episodes(const Trace& trace) {
    const TreeIndex index(trace.tree);
    const auto ticks = by_tick(trace, index);
    std::vector<BarrierEpisode> out;
    for (const NodeSpec* node : nodes_of(index, {NodeKind::ParallelSync})) {
        std::optional<BarrierEpisode> open;
        auto close = [&] {
            if (open) out.push_back(*open);
            open.reset();
        };
        for (std::size_t k = 0; k < ticks.size(); ++k) {
            std::vector<std::string> waiting;
            double frozen = 1.0;
            for (const auto& c : node->children) {
                if (event_of(ticks[k], c.id, EventKind::Paused)) waiting.push_back(c.id);
                if (const auto* e = event_of(ticks[k], c.id, EventKind::Ticked)) frozen = std::min(frozen, e->progress);
            }
            if (waiting.empty()) {
                close();
                continue;
            }
            const int tick = static_cast<int>(k);
            if (open && open->frozen_progress == frozen) {
                open->last_tick = tick;
                for (auto& w : waiting) {
                    if (std::find(open->waiting.begin(), open->waiting.end(), w) == open->waiting.end()) {
                        open->waiting.push_back(w);
                    }
                }
            } else {
                close();
                open = BarrierEpisode{node->id, tick, tick, frozen, waiting};
            }
        }
        close();
    }
    return out;
}

std::vector<std::vector<std::string>> resource_holders(const Trace& trace, const std::string& resource) {
    const TreeIndex index(trace.tree);
    const auto ticks = by_tick(trace, index);
    std::vector<std::vector<std::string>> out(ticks.size());
    for (std::size_t k = 0; k < ticks.size(); ++k) {
        for (const auto& [node, e] : ticks[k]) {
            if (e->event != EventKind::Ticked || index.find(node)->node->kind != NodeKind::Action) continue;
            if (std::find(e->resources.begin(), e->resources.end(), resource) != e->resources.end()) {
                out[k].push_back(node);
            }
        }
    }
    return out;
}

std::vector<Handover> resource_handovers(const Trace& trace) {
    const TreeIndex index(trace.tree);
    const auto ticks = by_tick(trace, index);
    std::set<std::string> resources;
    for (const auto& e : trace.events) resources.insert(e.resources.begin(), e.resources.end());

    std::vector<Handover> out;
    for (const auto& r : resources) {
        const auto holders = resource_holders(trace, r);
        for (std::size_t k = 1; k < holders.size(); ++k) {
            for (const auto& prev : holders[k - 1]) {
                if (!event_of(ticks[k], prev, EventKind::Paused)) continue;
                for (const auto& now : holders[k]) {
                    if (now != prev) out.push_back({static_cast<int>(k), r, prev, now});
                }
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Handover& a, const Handover& b) { return a.tick < b.tick; });
    return out;
}

}  // namespace cbt
