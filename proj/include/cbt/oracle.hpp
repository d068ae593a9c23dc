#pragma once

// Explicit-table semantics over small enumerable worlds. Every node is
// composed bottom-up into total maps (transition, status, progress,
// resources) over the whole state set, independently of the tick engine, so
// the two can be compared step by step.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbt/aging.hpp"
#include "cbt/core.hpp"

namespace cbt::oracle {

/// Tables of one leaf, indexed by state.
struct FiniteLeaf {
    bool condition = false;
    std::vector<int> transition;
    std::vector<Status> status;
    std::vector<double> progress;
    std::vector<ResourceSet> resources;
    std::set<int> footprint;  ///< variables the tables read or write
};

/// Mixed-radix product of small variables; state s encodes every value.
struct FiniteWorld {
    std::vector<int> var_sizes;
    std::map<std::string, FiniteLeaf> leaves;
    ResourceCatalog catalog;

    int state_count() const;
    int get(int state, int var) const;
    int set(int state, int var, int value) const;
};

class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ComposedMaps {
    std::vector<int> transition;
    std::vector<Status> status;
    std::vector<double> progress;
    std::vector<ResourceSet> resources;
    friend bool operator==(const ComposedMaps&, const ComposedMaps&) = default;
};

/// Cross-tick memory of the parallel operators, keyed by node id.
struct Memory {
    std::map<std::string, Status> retained;  ///< last status of parallel children
    std::map<std::string, Priority> priority;
    std::map<std::string, bool> holding;

    static Memory initial(const NodeSpec& root);
};

/// Composed maps of `node` given the memory at the start of a tick.
ComposedMaps compose(const NodeSpec& node, const FiniteWorld& world, const Memory& memory,
                     const PolicyConfig& policy = {});

/// Memory after ticking `root` once from `state` under `memory`.
Memory advance(const NodeSpec& root, const FiniteWorld& world, const Memory& memory, int state,
               const PolicyConfig& policy = {});

/// Variables a subtree reads or writes.
std::set<int> footprint(const NodeSpec& node, const FiniteWorld& world);

struct RegionPartition {
    std::vector<int> success_region;
    std::vector<int> failure_region;
    std::vector<int> running_region;
};

RegionPartition classify_regions(const std::vector<Status>& status);

struct EquivalenceReport {
    bool equal = true;
    std::optional<int> first_divergence;  ///< tick index of the first mismatch
    std::string detail;
    std::vector<int> engine_states;  ///< x_0 .. x_horizon
    std::vector<int> oracle_states;
};

EquivalenceReport check_equivalence(const NodeSpec& tree, const FiniteWorld& world, int start_state,
                                    int horizon = 200, const PolicyConfig& policy = {});

/// Leaves whose tables touch variables outside their declared footprint.
std::vector<std::string> audit_footprints(const FiniteWorld& world);

struct FuzzCase {
    FiniteWorld world;
    NodeSpec tree;
    int start_state = 0;
};

/// Random 16-state world and a tree of depth <= 3 with at most 7 nodes.
/// Parallel and ParallelSync children get disjoint footprints.
FuzzCase random_case(std::uint64_t seed);

}  // namespace cbt::oracle
