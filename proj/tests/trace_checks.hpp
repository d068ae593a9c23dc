#pragma once

// Trace-level properties of the dispatch rules, checked independently of
// the engine's bookkeeping.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cbt/trace.hpp"

namespace checks {

inline bool halt_pause_exclusive(const cbt::Trace& t) {
    std::set<std::pair<int, std::string>> halted, paused;
    for (const auto& e : t.events) {
        if (e.event == cbt::EventKind::Halted) halted.insert({e.tick, e.node});
        if (e.event == cbt::EventKind::Paused) paused.insert({e.tick, e.node});
    }
    for (const auto& hp : halted) {
        if (paused.contains(hp)) return false;
    }
    return true;
}

/// Tick conservation and the halt/pause obligations.
inline std::vector<std::string> dispatch_problems(const cbt::Trace& t) {
    std::vector<std::string> problems;
    const cbt::TreeIndex index(t.tree);
    std::map<std::string, std::string> parent;
    for (const auto& e : index.nodes) {
        if (e.parent) parent[e.node->id] = e.parent->id;
    }
    std::vector<std::map<std::string, std::vector<const cbt::TraceEvent*>>> ticks(static_cast<std::size_t>(t.ticks));
    for (const auto& e : t.events) ticks.at(static_cast<std::size_t>(e.tick))[e.node].push_back(&e);

    auto has = [&](int k, const std::string& node, cbt::EventKind kind) {
        if (k < 0) return false;
        auto it = ticks[static_cast<std::size_t>(k)].find(node);
        if (it == ticks[static_cast<std::size_t>(k)].end()) return false;
        for (const auto* e : it->second) {
            if (e->event == kind) return true;
        }
        return false;
    };
    auto active = [&](int k, const std::string& node) {
        if (k < 0) return false;
        auto it = ticks[static_cast<std::size_t>(k)].find(node);
        if (it == ticks[static_cast<std::size_t>(k)].end()) return false;
        for (const auto* e : it->second) {
            if (e->event == cbt::EventKind::Paused) return true;
            if (e->event == cbt::EventKind::Ticked && e->status == cbt::Status::Running) return true;
        }
        return false;
    };

    for (int k = 0; k < t.ticks; ++k) {
        const std::string at = "tick " + std::to_string(k) + ": ";
        if (!has(k, t.tree.id, cbt::EventKind::Ticked)) problems.push_back(at + "root not ticked");
        for (const auto& [node, events] : ticks[static_cast<std::size_t>(k)]) {
            if (events.size() != 1) problems.push_back(at + node + " has several events");
            const auto kind = events.front()->event;
            const auto p = parent.find(node);
            if (kind == cbt::EventKind::Ticked && p != parent.end() && !has(k, p->second, cbt::EventKind::Ticked)) {
                problems.push_back(at + node + " ticked without its parent");
            }
            if (kind == cbt::EventKind::Halted && !active(k - 1, node)) {
                problems.push_back(at + node + " halted but was not running");
            }
        }
        for (const auto& entry : index.nodes) {
            const auto& id = entry.node->id;
            if (!active(k - 1, id) || has(k, id, cbt::EventKind::Ticked)) continue;
            const int stops = has(k, id, cbt::EventKind::Halted) + has(k, id, cbt::EventKind::Paused);
            if (stops != 1) problems.push_back(at + id + " stopped receiving ticks without one halt or pause");
        }
    }
    return problems;
}

}  // namespace checks
