#include "cbt/aging.hpp"

#include <algorithm>

namespace cbt {

int effective_priority(int base, int wait_ticks, bool holding, const PolicyConfig& cfg) {
    if (base < 0 || wait_ticks < 0 || cfg.aging_increment < 0 || cfg.hold_bonus < 0) {
        throw std::invalid_argument("priority inputs must be non-negative");
    }
    return base + wait_ticks * cfg.aging_increment + (holding ? cfg.hold_bonus : 0);
}

int effective_priority(const Priority& p, bool holding, const PolicyConfig& cfg) {
    return effective_priority(p.base, p.wait_ticks, holding, cfg);
}

Priority update_after_tick(Priority p, Arbitration outcome) {
    switch (outcome) {
    case Arbitration::Granted: p.wait_ticks = 0; break;
    case Arbitration::Denied: ++p.wait_ticks; break;
    case Arbitration::NotRequesting: break;
    }
    return p;
}

int starvation_bound(int max_base, int own_base, const PolicyConfig& cfg) {
    return std::max(0, max_base + cfg.hold_bonus - own_base) + 1;
}

int starvation_bound(const NodeSpec& tree, const PolicyConfig& cfg) {
    int bound = 1;
    for_each_node(tree, [&](const NodeSpec& n) {
        if (n.kind != NodeKind::ParallelMutex) return;
        int max_base = 0;
        for (const auto& c : n.children) max_base = std::max(max_base, c.base_priority.value_or(0));
        for (const auto& c : n.children) {
            bound = std::max(bound, starvation_bound(max_base, c.base_priority.value_or(0), cfg));
        }
    });
    return bound;
}

}  // namespace cbt
