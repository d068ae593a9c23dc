#pragma once

// Domain types shared by every module: statuses, progress values, resource
// symbols, priorities and the immutable tree description.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cbt {

enum class Status { Success, Failure, Running };

std::string_view to_string(Status s);
/// One-letter code used in traces ("S", "F", "R").
char status_code(Status s);
Status status_from_code(char c);

/// Execution progress of a node, always within [0, 1].
class Progress {
public:
    Progress() = default;
    explicit Progress(double value);

    static std::optional<Progress> make(double value) noexcept;

    double value() const noexcept { return value_; }

    friend auto operator<=>(const Progress&, const Progress&) = default;

private:
    double value_ = 0.0;
};

struct ResourceId {
    std::uint32_t index = 0;
    friend auto operator<=>(const ResourceId&, const ResourceId&) = default;
};

/// Finite set of resource ids.
class ResourceSet {
public:
    ResourceSet() = default;
    ResourceSet(std::initializer_list<ResourceId> ids) : ids_(ids) {}

    void insert(ResourceId id) { ids_.insert(id); }
    bool contains(ResourceId id) const { return ids_.contains(id); }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t size() const noexcept { return ids_.size(); }

    bool disjoint(const ResourceSet& other) const;
    ResourceSet united(const ResourceSet& other) const;
    ResourceSet intersected(const ResourceSet& other) const;
    ResourceSet& operator|=(const ResourceSet& other);

    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }

    friend bool operator==(const ResourceSet&, const ResourceSet&) = default;

private:
    std::set<ResourceId> ids_;
};

/// Interns resource tokens. Tokens are case-sensitive; the catalog only grows.
class ResourceCatalog {
public:
    ResourceId intern(std::string_view token);
    std::optional<ResourceId> find(std::string_view token) const;
    const std::string& name(ResourceId id) const;
    bool registered(ResourceId id) const noexcept { return id.index < names_.size(); }
    std::size_t size() const noexcept { return names_.size(); }

    ResourceSet make_set(std::initializer_list<std::string_view> tokens);
    std::vector<std::string> names(const ResourceSet& set) const;

private:
    std::vector<std::string> names_;
    std::map<std::string, ResourceId, std::less<>> index_;
};

struct Priority {
    int base = 0;
    int wait_ticks = 0;
    friend bool operator==(const Priority&, const Priority&) = default;
};

enum class NodeKind { Sequence, Fallback, Parallel, ParallelSync, ParallelMutex, Action, Condition };

std::string_view to_string(NodeKind k);
bool is_leaf(NodeKind k) noexcept;
bool is_parallel(NodeKind k) noexcept;

/// Immutable tree description. Operators carry children, leaves carry a
/// binding name resolved against a behavior registry at run construction.
struct NodeSpec {
    std::string id;
    NodeKind kind = NodeKind::Action;
    std::vector<NodeSpec> children;
    std::string leaf_ref;
    std::optional<int> success_threshold;
    std::optional<int> base_priority;

    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

NodeSpec action(std::string name, std::string id = {});
NodeSpec condition(std::string name, std::string id = {});
NodeSpec sequence(std::vector<NodeSpec> children, std::string id = {});
NodeSpec fallback(std::vector<NodeSpec> children, std::string id = {});
NodeSpec parallel(std::vector<NodeSpec> children, std::optional<int> threshold = {}, std::string id = {});
NodeSpec parallel_sync(std::vector<NodeSpec> children, std::optional<int> threshold = {}, std::string id = {});
NodeSpec parallel_mutex(std::vector<NodeSpec> children, std::string id = {});
NodeSpec with_priority(NodeSpec node, int base_priority);

/// Preorder path id of a child: "0" for the root, "0.1.2" for the third
/// child of the second child of the root.
std::string child_path(std::string_view parent_path, std::size_t index);

/// Fills every empty id with its preorder path.
void assign_default_ids(NodeSpec& root);

/// Number of nodes in the tree.
std::size_t node_count(const NodeSpec& root);
std::size_t tree_depth(const NodeSpec& root);

/// Visits nodes in preorder.
void for_each_node(const NodeSpec& root, const std::function<void(const NodeSpec&)>& fn);

struct ValidationIssue {
    enum class Kind { DuplicateId, EmptyOperator, LeafWithChildren, ThresholdOutOfRange, UnregisteredLeaf, MisplacedField, EmptyId };
    Kind kind;
    std::string node_id;
    std::string message;
};

std::string_view to_string(ValidationIssue::Kind k);

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const noexcept { return issues.empty(); }
    bool has(ValidationIssue::Kind kind, std::string_view node_id = {}) const;
    std::string to_string() const;
};

/// Checks structural invariants. `is_registered` resolves leaf bindings;
/// when absent, bindings are not checked.
ValidationReport validate_tree(const NodeSpec& root,
                               const std::function<bool(const NodeSpec&)>& is_registered = {});

/// Raised when a runtime contract on leaves or inputs is broken.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace cbt
