#pragma once

// Priority policy with linear aging for ParallelMutex arbitration.

#include "cbt/core.hpp"

namespace cbt {

struct PolicyConfig {
    int aging_increment = 2;  ///< added per denied tick; >= 1 for starvation-freedom
    int hold_bonus = 2;       ///< added while a child holds its grant and is Running
};

/// base + wait_ticks * aging_increment + (holding ? hold_bonus : 0)
int effective_priority(int base, int wait_ticks, bool holding, const PolicyConfig& cfg);
int effective_priority(const Priority& p, bool holding, const PolicyConfig& cfg);

enum class Arbitration { Granted, Denied, NotRequesting };

/// Granted resets the wait, Denied ages it, NotRequesting leaves it alone.
Priority update_after_tick(Priority p, Arbitration outcome);

/// Upper bound on consecutive denied ticks for a child with base priority
/// `own_base` contending against children whose base is at most `max_base`.
int starvation_bound(int max_base, int own_base, const PolicyConfig& cfg);

/// Largest per-child bound over every ParallelMutex in the tree; 1 when the
/// tree has no ParallelMutex.
int starvation_bound(const NodeSpec& tree, const PolicyConfig& cfg);

}  // namespace cbt
